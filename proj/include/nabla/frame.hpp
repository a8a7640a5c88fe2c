#pragma once

#include "error.hpp"
#include "system.hpp"

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nabla
{

using StateId = std::size_t;
// A subset of a frame's states, sized to that frame.
using StateSet = boost::dynamic_bitset<>;

// Finite Kripke frame (S, R, Lambda). States carry opaque string names and are
// addressed internally by their position.
class Frame
{
    std::vector< std::string > _names;
    std::map< std::string, StateId, std::less<> > _index;
    std::vector< std::vector< StateId > > _succ;
    std::vector< StateSet > _succ_sets;
    std::map< std::string, StateSet > _labels;

    void index_names()
    {
        if ( _names.empty() )
            throw InvalidParameter( "a frame needs at least one state" );
        for ( StateId i = 0; i < _names.size(); ++i )
        {
            if ( _names[ i ].empty() )
                throw InvalidParameter( "empty state name" );
            if ( !_index.emplace( _names[ i ], i ).second )
                throw InvalidParameter( "duplicate state '" + _names[ i ] + "'" );
        }
    }

    void add_edges( const std::vector< std::pair< StateId, StateId > >& edges )
    {
        _succ.assign( _names.size(), {} );
        _succ_sets.assign( _names.size(), StateSet( _names.size() ) );
        for ( auto [ a, b ] : edges )
        {
            if ( a >= _names.size() || b >= _names.size() )
                throw UnknownState( "edge references a state outside the frame" );
            if ( !_succ_sets[ a ].test( b ) )
            {
                _succ_sets[ a ].set( b );
                _succ[ a ].push_back( b );
            }
        }
        for ( auto& s : _succ )
            std::sort( s.begin(), s.end() );
    }

public:
    Frame() = default;

    Frame( std::vector< std::string > states, const std::vector< std::pair< std::string, std::string > >& edges,
           const std::map< std::string, std::vector< std::string > >& labels = {} )
            : _names{ std::move( states ) }
    {
        index_names();
        std::vector< std::pair< StateId, StateId > > ids;
        for ( const auto& [ a, b ] : edges )
            ids.emplace_back( index( a ), index( b ) );
        add_edges( ids );
        for ( const auto& [ p, members ] : labels )
        {
            auto& set = _labels.try_emplace( p, StateSet( size() ) ).first->second;
            for ( const auto& s : members )
                set.set( index( s ) );
        }
    }

    static Frame from_indices( std::vector< std::string > names, const std::vector< std::pair< StateId, StateId > >& edges,
                               const std::map< std::string, StateSet >& labels = {} )
    {
        Frame f;
        f._names = std::move( names );
        f.index_names();
        f.add_edges( edges );
        for ( const auto& [ p, set ] : labels )
        {
            if ( set.size() != f.size() )
                throw InvalidParameter( "label '" + p + "' sized for a different frame" );
            f._labels.emplace( p, set );
        }
        return f;
    }

    [[nodiscard]] std::size_t size() const { return _names.size(); }
    [[nodiscard]] const std::string& name( StateId s ) const { return _names.at( s ); }
    [[nodiscard]] const std::vector< std::string >& names() const { return _names; }
    [[nodiscard]] bool has_state( std::string_view name ) const { return _index.contains( name ); }

    [[nodiscard]] StateId index( std::string_view name ) const
    {
        auto it = _index.find( name );
        if ( it == _index.end() )
            throw UnknownState( "unknown state '" + std::string( name ) + "'" );
        return it->second;
    }

    [[nodiscard]] std::span< const StateId > successors( StateId s ) const { return _succ.at( s ); }
    [[nodiscard]] const StateSet& successor_set( StateId s ) const { return _succ_sets.at( s ); }

    [[nodiscard]] std::vector< std::pair< StateId, StateId > > edges() const
    {
        std::vector< std::pair< StateId, StateId > > out;
        for ( StateId s = 0; s < size(); ++s )
            for ( auto t : _succ[ s ] )
                out.emplace_back( s, t );
        return out;
    }

    [[nodiscard]] std::size_t edge_count() const
    {
        return std::accumulate( _succ.begin(), _succ.end(), std::size_t{ 0 },
                                []( std::size_t acc, const auto& v ) { return acc + v.size(); } );
    }

    [[nodiscard]] StateSet label( const std::string& p ) const
    {
        auto it = _labels.find( p );
        return it == _labels.end() ? empty_set() : it->second;
    }

    [[nodiscard]] const std::map< std::string, StateSet >& labels() const { return _labels; }

    [[nodiscard]] StateSet empty_set() const { return StateSet( size() ); }
    [[nodiscard]] StateSet full_set() const { return ~StateSet( size() ); }

    [[nodiscard]] std::vector< std::string > names_of( const StateSet& set ) const
    {
        std::vector< std::string > out;
        for ( auto i = set.find_first(); i != StateSet::npos; i = set.find_next( i ) )
            out.push_back( _names[ i ] );
        return out;
    }

    friend bool operator==( const Frame& a, const Frame& b )
    {
        return a._names == b._names && a._succ == b._succ && a._labels == b._labels;
    }
};

// R[s] by name.
inline std::vector< std::string > successors( const Frame& f, std::string_view s )
{
    std::vector< std::string > out;
    for ( auto t : f.successors( f.index( s ) ) )
        out.push_back( f.name( t ) );
    std::sort( out.begin(), out.end() );
    return out;
}

// Why `f` rooted at `root` is not a tree, or nullopt if it is one.
inline std::optional< std::string > tree_violation( const Frame& f, StateId root )
{
    if ( root >= f.size() )
        return "root outside the frame";
    if ( f.edge_count() != f.size() - 1 )
        return "edge count " + std::to_string( f.edge_count() ) + " differs from |states| - 1";
    std::vector< int > seen( f.size(), 0 );
    std::vector< StateId > stack{ root };
    seen[ root ] = 1;
    while ( !stack.empty() )
    {
        auto s = stack.back();
        stack.pop_back();
        for ( auto t : f.successors( s ) )
        {
            if ( seen[ t ] )
                return "state '" + f.name( t ) + "' reachable twice";
            seen[ t ] = 1;
            stack.push_back( t );
        }
    }
    for ( StateId s = 0; s < f.size(); ++s )
        if ( !seen[ s ] )
            return "state '" + f.name( s ) + "' unreachable from the root";
    return std::nullopt;
}

// A frame whose edges form a tree rooted at `root`.
class TreeFrame
{
    Frame _frame;
    StateId _root = 0;
    std::vector< std::optional< StateId > > _parent;
    std::vector< std::size_t > _depth;

public:
    TreeFrame( Frame frame, StateId root ) : _frame{ std::move( frame ) }, _root{ root }
    {
        if ( auto why = tree_violation( _frame, _root ) )
            throw InvalidParameter( "not a tree: " + *why );
        _parent.assign( _frame.size(), std::nullopt );
        _depth.assign( _frame.size(), 0 );
        std::vector< StateId > stack{ _root };
        while ( !stack.empty() )
        {
            auto s = stack.back();
            stack.pop_back();
            for ( auto t : _frame.successors( s ) )
            {
                _parent[ t ] = s;
                _depth[ t ] = _depth[ s ] + 1;
                stack.push_back( t );
            }
        }
    }

    TreeFrame( Frame frame, std::string_view root ) : TreeFrame( frame, frame.index( root ) ) {}

    [[nodiscard]] const Frame& frame() const { return _frame; }
    [[nodiscard]] StateId root() const { return _root; }
    [[nodiscard]] std::size_t size() const { return _frame.size(); }
    [[nodiscard]] std::optional< StateId > parent( StateId s ) const { return _parent.at( s ); }
    [[nodiscard]] std::size_t depth( StateId s ) const { return _depth.at( s ); }

    // a lies strictly above b.
    [[nodiscard]] bool is_proper_ancestor( StateId a, StateId b ) const
    {
        for ( auto p = _parent.at( b ); p; p = _parent[ *p ] )
            if ( *p == a )
                return true;
        return false;
    }

    // States of the subtree rooted at s, in preorder.
    [[nodiscard]] std::vector< StateId > subtree( StateId s ) const
    {
        std::vector< StateId > out;
        std::vector< StateId > stack{ s };
        while ( !stack.empty() )
        {
            auto t = stack.back();
            stack.pop_back();
            out.push_back( t );
            auto succ = _frame.successors( t );
            for ( auto it = succ.rbegin(); it != succ.rend(); ++it )
                stack.push_back( *it );
        }
        return out;
    }

    // root = path[0], ..., path.back() = s
    [[nodiscard]] std::vector< StateId > path_from_root( StateId s ) const
    {
        std::vector< StateId > out{ s };
        for ( auto p = _parent.at( s ); p; p = _parent[ *p ] )
            out.push_back( *p );
        std::reverse( out.begin(), out.end() );
        return out;
    }
};

// Tree of all paths of length <= depth starting at s; node names are the
// visited state names joined by '/'. `origin[i]` is the frame state node i copies.
struct Unravelling
{
    TreeFrame tree;
    std::vector< StateId > origin;
};

inline Unravelling unravel_with_origin( const Frame& f, StateId s, std::size_t depth )
{
    if ( s >= f.size() )
        throw UnknownState( "unravel: state outside the frame" );
    std::vector< std::string > names{ f.name( s ) };
    std::vector< StateId > origin{ s };
    std::vector< std::size_t > level{ 0 };
    std::vector< std::pair< StateId, StateId > > edges;
    for ( StateId node = 0; node < names.size(); ++node )
    {
        if ( level[ node ] == depth )
            continue;
        for ( auto t : f.successors( origin[ node ] ) )
        {
            edges.emplace_back( node, names.size() );
            names.push_back( names[ node ] + "/" + f.name( t ) );
            origin.push_back( t );
            level.push_back( level[ node ] + 1 );
        }
    }
    std::map< std::string, StateSet > labels;
    for ( const auto& [ p, set ] : f.labels() )
    {
        StateSet copy( names.size() );
        for ( StateId i = 0; i < names.size(); ++i )
            copy[ i ] = set[ origin[ i ] ];
        labels.emplace( p, copy );
    }
    return { TreeFrame( Frame::from_indices( names, edges, labels ), 0 ), origin };
}

inline TreeFrame unravel( const Frame& f, std::string_view s, std::size_t depth )
{
    return unravel_with_origin( f, f.index( s ), depth ).tree;
}

namespace detail
{

inline std::vector< std::string > numbered_states( std::size_t n )
{
    std::vector< std::string > out;
    for ( std::size_t i = 0; i < n; ++i )
        out.push_back( "s" + std::to_string( i ) );
    return out;
}

} // namespace detail

// s0 -> s1 -> ... -> s(k-1), unlabelled.
inline Frame chain( std::size_t k )
{
    if ( k == 0 )
        throw InvalidParameter( "chain length must be positive" );
    std::vector< std::pair< StateId, StateId > > edges;
    for ( StateId i = 0; i + 1 < k; ++i )
        edges.emplace_back( i, i + 1 );
    return Frame::from_indices( detail::numbered_states( k ), edges );
}

namespace detail
{

struct CzarneckiBuilder
{
    std::size_t k;
    std::vector< std::pair< StateId, StateId > > edges;
    std::vector< bool > p;
    std::vector< bool > q;

    StateId fresh( bool has_p, bool has_q )
    {
        p.push_back( has_p );
        q.push_back( has_q );
        return p.size() - 1;
    }

    // Returns the root of the depth-n stage.
    StateId build( std::size_t n )
    {
        if ( n == 1 )
        {
            // p-chain of length k ending in a deadlock
            auto root = fresh( true, false );
            auto prev = root;
            for ( std::size_t i = 1; i < k; ++i )
            {
                auto s = fresh( true, false );
                edges.emplace_back( prev, s );
                prev = s;
            }
            auto leaf = fresh( false, false );
            edges.emplace_back( prev, leaf );
            return root;
        }
        // q-root fanning out into p-chains of length 1..k, each continuing
        // into a copy of the (n-1) stage.
        auto root = fresh( false, true );
        for ( std::size_t j = 1; j <= k; ++j )
        {
            auto prev = root;
            for ( std::size_t i = 0; i < j; ++i )
            {
                auto s = fresh( true, false );
                edges.emplace_back( prev, s );
                prev = s;
            }
            edges.emplace_back( prev, build( n - 1 ) );
        }
        return root;
    }
};

} // namespace detail

// Stage k of a frame family for the n-disjunct Czarnecki-style formula of
// czarnecki_formula(n). The root is s0; per-frame closure ordinals grow with k.
inline Frame czarnecki( std::size_t n, std::size_t k )
{
    if ( n == 0 || k == 0 )
        throw InvalidParameter( "czarnecki(n, k) needs n >= 1 and k >= 1" );
    detail::CzarneckiBuilder b{ k, {}, {}, {} };
    b.build( n );
    const auto size = b.p.size();
    std::map< std::string, StateSet > labels;
    StateSet p( size ), q( size );
    for ( std::size_t i = 0; i < size; ++i )
    {
        p[ i ] = b.p[ i ];
        q[ i ] = b.q[ i ];
    }
    labels.emplace( "p", p );
    if ( n > 1 )
        labels.emplace( "q", q );
    return Frame::from_indices( detail::numbered_states( size ), b.edges, labels );
}

// mu x. or{and{p, dia x}, box ff} for n = 1; higher n add the
// and{q, box x} disjunct used by the fan layers of czarnecki(n, k).
inline EquationalFormula czarnecki_formula( std::size_t n )
{
    if ( n == 0 )
        throw InvalidParameter( "czarnecki formula needs n >= 1" );
    auto x = var( "x" );
    std::vector< Formula > disjuncts{ conj( { prop( "p" ), dia( x ) } ), box( ff() ) };
    if ( n > 1 )
        disjuncts.push_back( conj( { prop( "q" ), box( x ) } ) );
    return EquationalFormula( EquationSystem( { { "x", disj( disjuncts ) } } ), "x" );
}

// Deterministic pseudo-random frame: each ordered pair (self loops included)
// is an edge with probability edge_prob, each proposition holds at each state
// with probability 1/2.
inline Frame random_frame( std::uint64_t seed, std::size_t size, double edge_prob, const std::vector< std::string >& props )
{
    if ( size == 0 )
        throw InvalidParameter( "random frame size must be positive" );
    if ( !( edge_prob >= 0.0 && edge_prob <= 1.0 ) )
        throw InvalidParameter( "edge probability must lie in [0, 1]" );
    std::mt19937_64 rng( seed );
    // mt19937_64 output is fully specified, unlike the std distributions.
    auto uniform = [ & ] { return static_cast< double >( rng() >> 11 ) * 0x1.0p-53; };
    std::vector< std::pair< StateId, StateId > > edges;
    for ( StateId a = 0; a < size; ++a )
        for ( StateId b = 0; b < size; ++b )
            if ( uniform() < edge_prob )
                edges.emplace_back( a, b );
    std::map< std::string, StateSet > labels;
    for ( const auto& p : props )
    {
        StateSet set( size );
        for ( StateId s = 0; s < size; ++s )
            set[ s ] = uniform() < 0.5;
        labels.emplace( p, set );
    }
    return Frame::from_indices( detail::numbered_states( size ), edges, labels );
}

// Every frame with 1..max_states states over `props`. With `up_to_isomorphism`
// only one representative per isomorphism class is kept (the one whose
// encoding is minimal under state permutations).
inline std::vector< Frame > enumerate_frames( std::size_t max_states, const std::vector< std::string >& props,
                                              bool up_to_isomorphism = true )
{
    if ( max_states > 4 )
        throw InvalidParameter( "exhaustive enumeration is limited to 4 states" );
    std::vector< Frame > out;
    const auto np = props.size();
    for ( std::size_t n = 1; n <= max_states; ++n )
    {
        const std::uint64_t edge_masks = std::uint64_t{ 1 } << ( n * n );
        const std::uint64_t label_masks = std::uint64_t{ 1 } << ( n * np );
        std::vector< std::size_t > perm( n );
        std::vector< std::vector< std::size_t > > perms;
        std::iota( perm.begin(), perm.end(), 0 );
        do
            perms.push_back( perm );
        while ( std::next_permutation( perm.begin(), perm.end() ) );

        auto permute = [ & ]( const std::vector< std::size_t >& pi, std::uint64_t e, std::uint64_t l ) {
            std::uint64_t pe = 0, pl = 0;
            for ( std::size_t a = 0; a < n; ++a )
                for ( std::size_t b = 0; b < n; ++b )
                    if ( e >> ( a * n + b ) & 1 )
                        pe |= std::uint64_t{ 1 } << ( pi[ a ] * n + pi[ b ] );
            for ( std::size_t s = 0; s < n; ++s )
                for ( std::size_t p = 0; p < np; ++p )
                    if ( l >> ( s * np + p ) & 1 )
                        pl |= std::uint64_t{ 1 } << ( pi[ s ] * np + p );
            return std::pair{ pe, pl };
        };

        for ( std::uint64_t e = 0; e < edge_masks; ++e )
            for ( std::uint64_t l = 0; l < label_masks; ++l )
            {
                if ( up_to_isomorphism )
                {
                    bool minimal = true;
                    for ( const auto& pi : perms )
                        if ( permute( pi, e, l ) < std::pair{ e, l } )
                        {
                            minimal = false;
                            break;
                        }
                    if ( !minimal )
                        continue;
                }
                std::vector< std::pair< StateId, StateId > > edges;
                for ( std::size_t a = 0; a < n; ++a )
                    for ( std::size_t b = 0; b < n; ++b )
                        if ( e >> ( a * n + b ) & 1 )
                            edges.emplace_back( a, b );
                std::map< std::string, StateSet > labels;
                for ( std::size_t p = 0; p < np; ++p )
                {
                    StateSet set( n );
                    for ( std::size_t s = 0; s < n; ++s )
                        set[ s ] = l >> ( s * np + p ) & 1;
                    labels.emplace( props[ p ], set );
                }
                out.push_back( Frame::from_indices( detail::numbered_states( n ), edges, labels ) );
            }
    }
    return out;
}

// `count` random frames with 1..max_states states and varying edge density.
inline std::vector< Frame > random_frames( std::size_t count, std::size_t max_states, const std::vector< std::string >& props,
                                           std::uint64_t seed )
{
    std::mt19937_64 rng( seed );
    std::vector< Frame > out;
    for ( std::size_t i = 0; i < count; ++i )
    {
        auto size = 1 + rng() % max_states;
        auto density = static_cast< double >( 1 + rng() % 9 ) / 10.0;
        out.push_back( random_frame( rng(), size, density, props ) );
    }
    return out;
}

// `.frame` text: `states:`, `edges: a->b ...`, `labels: p: s0 s1 ; q: s2`,
// optional `root:`. Lines may repeat; `#` starts a comment.
struct FrameDocument
{
    Frame frame;
    std::optional< StateId > root;
};

inline FrameDocument parse_frame( std::string_view text )
{
    std::vector< std::string > states;
    std::vector< std::pair< std::string, std::string > > edges;
    std::map< std::string, std::vector< std::string > > labels;
    std::optional< std::string > root;
    std::size_t number = 0;
    std::size_t start = 0;
    auto words = []( std::string_view s ) {
        std::vector< std::string > out;
        std::istringstream in{ std::string( s ) };
        for ( std::string w; in >> w; )
            out.push_back( w );
        return out;
    };
    while ( start <= text.size() )
    {
        auto end = text.find( '\n', start );
        if ( end == std::string_view::npos )
            end = text.size();
        ++number;
        auto line = detail::trim( detail::strip_comment( text.substr( start, end - start ) ) );
        start = end + 1;
        if ( line.empty() )
            continue;
        auto colon = line.find( ':' );
        if ( colon == std::string_view::npos )
            throw SyntaxError( "expected 'key: ...'", number, 1 );
        auto key = detail::trim( line.substr( 0, colon ) );
        auto rest = line.substr( colon + 1 );
        if ( key == "states" )
        {
            auto w = words( rest );
            states.insert( states.end(), w.begin(), w.end() );
        }
        else if ( key == "edges" )
        {
            for ( const auto& e : words( rest ) )
            {
                auto arrow = e.find( "->" );
                if ( arrow == std::string::npos || arrow == 0 || arrow + 2 == e.size() )
                    throw SyntaxError( "malformed edge '" + e + "'", number, 1 );
                edges.emplace_back( e.substr( 0, arrow ), e.substr( arrow + 2 ) );
            }
        }
        else if ( key == "labels" )
        {
            std::size_t from = 0;
            std::string_view body = rest;
            while ( from <= body.size() )
            {
                auto semi = body.find( ';', from );
                if ( semi == std::string_view::npos )
                    semi = body.size();
                auto item = detail::trim( body.substr( from, semi - from ) );
                from = semi + 1;
                if ( item.empty() )
                    continue;
                auto c = item.find( ':' );
                if ( c == std::string_view::npos )
                    throw SyntaxError( "expected 'prop: states' in labels", number, 1 );
                auto p = std::string( detail::trim( item.substr( 0, c ) ) );
                if ( !detail::is_identifier( p ) )
                    throw SyntaxError( "invalid proposition name '" + p + "'", number, 1 );
                auto w = words( item.substr( c + 1 ) );
                auto& members = labels[ p ];
                members.insert( members.end(), w.begin(), w.end() );
            }
        }
        else if ( key == "root" )
        {
            auto w = words( rest );
            if ( w.size() != 1 )
                throw SyntaxError( "expected exactly one root state", number, 1 );
            root = w.front();
        }
        else
            throw SyntaxError( "unknown key '" + std::string( key ) + "'", number, 1 );
    }
    FrameDocument doc{ Frame( states, edges, labels ), std::nullopt };
    if ( root )
        doc.root = doc.frame.index( *root );
    return doc;
}

inline std::string to_text( const Frame& f, std::optional< StateId > root = std::nullopt )
{
    std::ostringstream os;
    os << "states:";
    for ( const auto& n : f.names() )
        os << ' ' << n;
    os << "\nedges:";
    for ( auto [ a, b ] : f.edges() )
        os << ' ' << f.name( a ) << "->" << f.name( b );
    os << "\nlabels:";
    bool first = true;
    for ( const auto& [ p, set ] : f.labels() )
    {
        os << ( first ? " " : " ; " ) << p << ":";
        for ( const auto& n : f.names_of( set ) )
            os << ' ' << n;
        first = false;
    }
    os << "\n";
    if ( root )
        os << "root: " << f.name( *root ) << "\n";
    return os.str();
}

inline std::string to_text( const TreeFrame& t ) { return to_text( t.frame(), t.root() ); }

} // namespace nabla
