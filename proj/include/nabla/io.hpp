#pragma once

// Text, JSON and Graphviz renderings of frames, systems and annotations.

#include "annotation.hpp"
#include "frame.hpp"
#include "normalform.hpp"
#include "pump.hpp"
#include "system.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nabla
{

using Json = nlohmann::ordered_json;

// `.ann` text: one line per state, `s0: phi @ w.2+3; psi @ 4;`. A state may
// appear on several lines; states without a line get the empty set.
inline Annotation parse_annotation( std::string_view text, const EquationSystem& sys, const Frame& f )
{
    Annotation theta( f.size() );
    std::size_t number = 0;
    std::size_t start = 0;
    while ( start <= text.size() )
    {
        auto end = text.find( '\n', start );
        if ( end == std::string_view::npos )
            end = text.size();
        ++number;
        auto raw = text.substr( start, end - start );
        auto line = detail::trim( detail::strip_comment( raw ) );
        start = end + 1;
        if ( line.empty() )
            continue;
        auto colon = line.find( ':' );
        if ( colon == std::string_view::npos )
            throw SyntaxError( "expected 'state: formula @ ordinal; ...'", number, 1 );
        auto name = detail::trim( line.substr( 0, colon ) );
        if ( !f.has_state( name ) )
            throw UnknownState( std::to_string( number ) + ":1: unknown state '" + std::string( name ) + "'" );
        auto s = f.index( name );
        auto body = line.substr( colon + 1 );
        std::size_t from = 0;
        while ( from <= body.size() )
        {
            auto semi = body.find( ';', from );
            if ( semi == std::string_view::npos )
                semi = body.size();
            auto item = detail::trim( body.substr( from, semi - from ) );
            auto column = static_cast< std::size_t >( item.data() - raw.data() ) + 1;
            from = semi + 1;
            if ( item.empty() )
                continue;
            auto at = item.rfind( '@' );
            if ( at == std::string_view::npos )
                throw SyntaxError( "expected 'formula @ ordinal'", number, column );
            try
            {
                theta.insert( s, parse_formula( detail::trim( item.substr( 0, at ) ), sys ),
                              parse_ordinal( detail::trim( item.substr( at + 1 ) ) ) );
            }
            catch ( const SyntaxError& e )
            {
                throw SyntaxError( "in '" + std::string( item ) + "': " + e.what(), number, column );
            }
        }
    }
    return theta;
}

inline std::string to_text( const Annotation& theta, const Frame& f )
{
    detail::require_same_size( theta, f );
    std::string out;
    for ( StateId s = 0; s < f.size(); ++s )
    {
        out += f.name( s ) + ":";
        for ( const auto& a : theta.at( s ) )
            out += " " + to_string( a ) + ";";
        out += "\n";
    }
    return out;
}

// JSON schemas:
//   frame       {"states": [..], "edges": [[a, b], ..], "labels": {p: [..]}, "root": s?}
//   system      {"init": x, "equations": [{"var": x, "formula": ".."}, ..]}
//   annotation  {state: [{"formula": "..", "ordinal": ".."}, ..], ..}
// Formulas and ordinals are stored in their text syntax.

inline Json to_json( const Frame& f, std::optional< StateId > root = std::nullopt )
{
    Json j;
    j[ "states" ] = f.names();
    j[ "edges" ] = Json::array();
    for ( auto [ a, b ] : f.edges() )
        j[ "edges" ].push_back( { f.name( a ), f.name( b ) } );
    j[ "labels" ] = Json::object();
    for ( const auto& [ p, set ] : f.labels() )
        j[ "labels" ][ p ] = f.names_of( set );
    if ( root )
        j[ "root" ] = f.name( *root );
    return j;
}

inline Json to_json( const TreeFrame& t ) { return to_json( t.frame(), t.root() ); }

inline FrameDocument frame_from_json( const Json& j )
{
    try
    {
        std::vector< std::pair< std::string, std::string > > edges;
        for ( const auto& e : j.at( "edges" ) )
        {
            if ( !e.is_array() || e.size() != 2 )
                throw SyntaxError( "an edge is a pair of state names", 1, 1 );
            edges.emplace_back( e[ 0 ].get< std::string >(), e[ 1 ].get< std::string >() );
        }
        std::map< std::string, std::vector< std::string > > labels;
        if ( j.contains( "labels" ) )
            for ( const auto& [ p, members ] : j.at( "labels" ).items() )
                labels[ p ] = members.get< std::vector< std::string > >();
        FrameDocument doc{ Frame( j.at( "states" ).get< std::vector< std::string > >(), edges, labels ), std::nullopt };
        if ( j.contains( "root" ) )
            doc.root = doc.frame.index( j.at( "root" ).get< std::string >() );
        return doc;
    }
    catch ( const Json::exception& e )
    {
        throw SyntaxError( std::string( "malformed frame JSON: " ) + e.what(), 1, 1 );
    }
}

inline Json to_json( const EquationalFormula& ef )
{
    Json j;
    j[ "init" ] = ef.init();
    j[ "equations" ] = Json::array();
    for ( const auto& x : ef.system().vars() )
        j[ "equations" ].push_back( { { "var", x }, { "formula", to_string( ef.system().equation( x ) ) } } );
    return j;
}

inline EquationalFormula system_from_json( const Json& j )
{
    try
    {
        std::string text = "system\ninit: " + j.at( "init" ).get< std::string >() + "\n";
        for ( const auto& e : j.at( "equations" ) )
            text += e.at( "var" ).get< std::string >() + " = " + e.at( "formula" ).get< std::string >() + "\n";
        return parse_system( text );
    }
    catch ( const Json::exception& e )
    {
        throw SyntaxError( std::string( "malformed system JSON: " ) + e.what(), 1, 1 );
    }
}

inline Json to_json( const AnnotatedFormula& a )
{
    return { { "formula", to_string( a.formula ) }, { "ordinal", to_string( a.ordinal ) } };
}

inline Json to_json( const Annotation& theta, const Frame& f )
{
    detail::require_same_size( theta, f );
    Json j = Json::object();
    for ( StateId s = 0; s < f.size(); ++s )
    {
        auto& entries = j[ f.name( s ) ] = Json::array();
        for ( const auto& a : theta.at( s ) )
            entries.push_back( to_json( a ) );
    }
    return j;
}

inline Annotation annotation_from_json( const Json& j, const EquationSystem& sys, const Frame& f )
{
    try
    {
        Annotation theta( f.size() );
        for ( const auto& [ name, entries ] : j.items() )
        {
            auto s = f.index( name );
            for ( const auto& e : entries )
                theta.insert( s, parse_formula( e.at( "formula" ).get< std::string >(), sys ),
                              parse_ordinal( e.at( "ordinal" ).get< std::string >() ) );
        }
        return theta;
    }
    catch ( const Json::exception& e )
    {
        throw SyntaxError( std::string( "malformed annotation JSON: " ) + e.what(), 1, 1 );
    }
}

inline Json to_json( const Violation& v, const Frame& f )
{
    Json j{ { "clause", v.clause }, { "state", f.name( v.state ) } };
    if ( v.formula )
        j[ "formula" ] = to_json( *v.formula );
    if ( !v.detail.empty() )
        j[ "detail" ] = v.detail;
    return j;
}

inline Json to_json( const std::vector< Violation >& vs, const Frame& f )
{
    Json j{ { "ok", vs.empty() }, { "violations", Json::array() } };
    for ( const auto& v : vs )
        j[ "violations" ].push_back( to_json( v, f ) );
    return j;
}

inline std::string violations_text( const std::vector< Violation >& vs, const Frame& f )
{
    if ( vs.empty() )
        return "OK (0 violations)\n";
    std::string out;
    for ( const auto& v : vs )
        out += to_string( v, f ) + "\n";
    out += std::to_string( vs.size() ) + ( vs.size() == 1 ? " violation\n" : " violations\n" );
    return out;
}

inline Json to_json( const AnnotatedTree& t )
{
    return { { "frame", to_json( t.tree ) }, { "theta", to_json( t.theta, t.tree.frame() ) },
             { "phi", to_json( t.phi, t.tree.frame() ) } };
}

inline AnnotatedTree annotated_tree_from_json( const Json& j, const EquationSystem& sys )
{
    auto doc = frame_from_json( j.at( "frame" ) );
    TreeFrame tree( doc.frame, doc.root.value_or( 0 ) );
    auto theta = annotation_from_json( j.at( "theta" ), sys, tree.frame() );
    std::optional< Annotation > phi;
    if ( j.contains( "phi" ) )
        phi = annotation_from_json( j.at( "phi" ), sys, tree.frame() );
    return { std::move( tree ), std::move( theta ), std::move( phi ) };
}

inline Json to_json( const RepetitionPair& p, const Frame& f )
{
    Json gamma = Json::array();
    for ( const auto& g : p.gamma )
        gamma.push_back( to_string( g ) );
    return { { "companion", f.name( p.companion ) }, { "bud", f.name( p.bud ) }, { "gamma", gamma },
             { "alpha", to_string( p.alpha ) }, { "beta", to_string( p.beta ) } };
}

inline std::string to_text( const RepetitionPair& p, const Frame& f )
{
    return f.name( p.companion ) + " -> " + f.name( p.bud ) + ": nab" + to_string( p.gamma ) + " @ " +
           to_string( p.alpha ) + " > " + to_string( p.beta );
}

inline Json to_json( const PumpResult& r, const Frame& original, const Frame& donor )
{
    Json j = to_json( r.tree );
    auto& prov = j[ "provenance" ] = Json::object();
    for ( StateId i = 0; i < r.provenance.size(); ++i )
    {
        const auto& src = r.provenance[ i ];
        prov[ r.tree.tree.frame().name( i ) ] = { { "source", src.from_donor ? "donor" : "tree" },
                                                  { "state", ( src.from_donor ? donor : original ).name( src.state ) } };
    }
    return j;
}

inline Json to_json( const TranslationReport& r )
{
    Json fresh = Json::array();
    for ( const auto& v : r.fresh )
        fresh.push_back( { { "name", v.name }, { "role", v.role }, { "meaning", to_string( v.meaning ) } } );
    Json oracle{ { "frames_checked", r.oracle.frames_checked }, { "mismatches", r.oracle.mismatches } };
    if ( r.oracle.first_mismatch )
        oracle[ "first_mismatch" ] = *r.oracle.first_mismatch;
    return { { "input", to_json( r.input ) }, { "output", to_json( r.output ) }, { "fresh", fresh }, { "oracle", oracle } };
}

namespace detail
{

inline std::string dot_escape( std::string_view s )
{
    std::string out;
    for ( char c : s )
    {
        if ( c == '"' || c == '\\' )
            out += '\\';
        out += c;
    }
    return out;
}

} // namespace detail

// Graphviz digraph. Annotated trees list theta under each state name, with
// relevant entries marked by '*'.
inline std::string to_dot( const Frame& f, std::optional< StateId > root = std::nullopt, const Annotation* theta = nullptr,
                           const Annotation* phi = nullptr )
{
    std::ostringstream os;
    os << "digraph frame {\n  node [shape=box];\n";
    for ( StateId s = 0; s < f.size(); ++s )
    {
        std::string label = f.name( s );
        std::vector< std::string > props;
        for ( const auto& [ p, set ] : f.labels() )
            if ( set.test( s ) )
                props.push_back( p );
        if ( !props.empty() )
        {
            label += " {";
            for ( std::size_t i = 0; i < props.size(); ++i )
                label += ( i ? ", " : "" ) + props[ i ];
            label += "}";
        }
        if ( theta )
            for ( const auto& a : theta->at( s ) )
                label += "\n" + std::string( phi && phi->at( s ).contains( a ) ? "* " : "" ) + to_string( a );
        os << "  s" << s << " [label=\"" << detail::dot_escape( label ) << "\"";
        if ( root && *root == s )
            os << ", style=bold";
        os << "];\n";
    }
    for ( auto [ a, b ] : f.edges() )
        os << "  s" << a << " -> s" << b << ";\n";
    os << "}\n";
    return os.str();
}

inline std::string to_dot( const AnnotatedTree& t ) { return to_dot( t.tree.frame(), t.tree.root(), &t.theta, &t.phi ); }

} // namespace nabla
