#pragma once

#include "annotation.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <variant>

namespace nabla
{

using BigNat = boost::multiprecision::cpp_int;

// A tree with an annotation and a (possibly empty) relevant part of it.
struct AnnotatedTree
{
    TreeFrame tree;
    Annotation theta;
    Annotation phi;

    AnnotatedTree( TreeFrame t, Annotation th, std::optional< Annotation > ph = std::nullopt )
            : tree{ std::move( t ) }, theta{ std::move( th ) }, phi{ ph ? std::move( *ph ) : Annotation( tree.size() ) }
    {
        if ( theta.size() != tree.size() || phi.size() != tree.size() )
            throw InvalidParameter( "annotation sized for a different tree" );
        for ( StateId s = 0; s < tree.size(); ++s )
            for ( const auto& a : phi.at( s ) )
                if ( !theta.at( s ).contains( a ) )
                    throw InvalidParameter( "relevant entry '" + to_string( a ) + "' at " + tree.frame().name( s ) +
                                            " is not in the annotation" );
    }

    explicit AnnotatedTree( const RelevantPart& part ) : AnnotatedTree( part.tree, part.theta, part.phi ) {}
};

namespace detail
{

inline std::vector< AnnotatedFormula > limit_nablas( const AnnSet& set )
{
    std::vector< AnnotatedFormula > out;
    for ( const auto& a : set )
        if ( a.formula.is( Kind::Nabla ) && is_limit( a.ordinal ) )
            out.push_back( a );
    return out;
}

inline void require_state( const AnnotatedTree& t, StateId s )
{
    if ( s >= t.tree.size() )
        throw NotATreeState( "state " + std::to_string( s ) + " is not in the tree" );
}

} // namespace detail

inline std::set< StateId > limit_states( const AnnotatedTree& t )
{
    std::set< StateId > out;
    for ( StateId s = 0; s < t.tree.size(); ++s )
        if ( !detail::limit_nablas( t.phi.at( s ) ).empty() )
            out.insert( s );
    return out;
}

struct RepetitionPair
{
    StateId companion = 0;
    StateId bud = 0;
    FormulaSet gamma;
    Ordinal alpha;
    Ordinal beta;

    friend bool operator==( const RepetitionPair&, const RepetitionPair& ) = default;
};

// Whether (s, t) is a repetition pair, given t below s. One entry per shared
// nab and pair of limit annotations beta < alpha.
inline std::vector< RepetitionPair > repetition_pairs_at( const AnnotatedTree& t, StateId s, StateId b )
{
    std::vector< RepetitionPair > out;
    if ( stripped( t.theta.at( s ) ) != stripped( t.theta.at( b ) ) ||
         stripped( t.phi.at( s ) ) != stripped( t.phi.at( b ) ) )
        return out;
    for ( const auto& upper : detail::limit_nablas( t.phi.at( s ) ) )
        for ( const auto& lower : detail::limit_nablas( t.phi.at( b ) ) )
            if ( upper.formula == lower.formula && lower.ordinal < upper.ordinal )
                out.push_back( { s, b, args_of( upper.formula ), upper.ordinal, lower.ordinal } );
    return out;
}

// Pairs are searched along ancestry only: in a tree, a path from s to t
// means s lies above t.
inline std::vector< RepetitionPair > find_repetition_pairs( const AnnotatedTree& t )
{
    std::vector< RepetitionPair > out;
    auto limits = limit_states( t );
    for ( auto b : limits )
        for ( auto p = t.tree.parent( b ); p; p = t.tree.parent( *p ) )
            if ( limits.contains( *p ) )
                for ( auto& pair : repetition_pairs_at( t, *p, b ) )
                    out.push_back( std::move( pair ) );
    std::sort( out.begin(), out.end(), []( const RepetitionPair& a, const RepetitionPair& b ) {
        return std::tie( a.companion, a.bud, a.alpha, a.beta ) < std::tie( b.companion, b.bud, b.alpha, b.beta );
    } );
    return out;
}

inline BigNat repetition_bound( std::size_t closure_size )
{
    BigNat n = 1;
    n <<= 2 * closure_size;
    return n + 1;
}

inline BigNat repetition_bound( const EquationSystem& sys ) { return repetition_bound( size( sys ) ); }

// alpha >= omega.n for an arbitrarily large n.
inline bool at_least_omega_times( const Ordinal& alpha, const BigNat& n )
{
    if ( n == 0 )
        return true;
    if ( alpha.is_zero() )
        return false;
    const auto& top = alpha.terms().front();
    if ( top.exponent >= 2 )
        return true;
    if ( top.exponent == 0 )
        return false;
    return BigNat( top.coefficient ) >= n;
}

struct PairFound
{
    RepetitionPair pair;
};

struct HypothesisUnmet
{
    std::string reason;
};

// Every hypothesis held and yet the path has no repetition pair.
struct NoPairFound
{
    std::string reason;
};

using DescentOutcome = std::variant< PairFound, HypothesisUnmet, NoPairFound >;

// The trace ordinal at each path state is the least annotation in its relevant
// part. With one relevant nab per state this is that nab's annotation.
inline DescentOutcome check_descent_hypothesis( const AnnotatedTree& t, const std::vector< StateId >& path,
                                                const EquationSystem& sys, std::optional< BigNat > bound = std::nullopt )
{
    const auto n = bound ? *bound : repetition_bound( sys );
    const auto& f = t.tree.frame();
    if ( path.empty() )
        return HypothesisUnmet{ "empty path" };
    for ( auto s : path )
        detail::require_state( t, s );
    for ( std::size_t i = 0; i + 1 < path.size(); ++i )
        if ( !f.successor_set( path[ i ] ).test( path[ i + 1 ] ) )
            return HypothesisUnmet{ "no edge " + f.name( path[ i ] ) + " -> " + f.name( path[ i + 1 ] ) };
    std::vector< Ordinal > trace;
    for ( auto s : path )
    {
        if ( t.phi.at( s ).empty() )
            return HypothesisUnmet{ "relevant part empty at " + f.name( s ) };
        auto least = std::min_element( t.phi.at( s ).begin(), t.phi.at( s ).end(),
                                       []( const AnnotatedFormula& a, const AnnotatedFormula& b ) { return a.ordinal < b.ordinal; } );
        trace.push_back( least->ordinal );
    }
    if ( !at_least_omega_times( trace.front(), n ) )
        return HypothesisUnmet{ "alpha0 below w." + n.str() };
    if ( !trace.back().is_zero() )
        return HypothesisUnmet{ "trace ends at " + to_string( trace.back() ) + ", not 0" };
    for ( const auto& v : check_relevant( t.phi, t.theta, sys, f ) )
        if ( std::find( path.begin(), path.end(), v.state ) != path.end() )
            return HypothesisUnmet{ "relevant part broken: " + to_string( v, f ) };
    for ( std::size_t j = 1; j < path.size(); ++j )
        for ( std::size_t i = 0; i < j; ++i )
        {
            auto pairs = repetition_pairs_at( t, path[ i ], path[ j ] );
            if ( !pairs.empty() )
                return PairFound{ pairs.front() };
        }
    return NoPairFound{ "no two limit states on the path share a profile" };
}

// The subtree at s as an annotated tree of its own, states in preorder.
inline AnnotatedTree subtree( const AnnotatedTree& t, StateId s )
{
    detail::require_state( t, s );
    auto nodes = t.tree.subtree( s );
    std::map< StateId, StateId > at;
    for ( StateId i = 0; i < nodes.size(); ++i )
        at.emplace( nodes[ i ], i );
    const auto& f = t.tree.frame();
    std::vector< std::string > names;
    std::vector< std::pair< StateId, StateId > > edges;
    for ( auto n : nodes )
    {
        names.push_back( f.name( n ) );
        for ( auto c : f.successors( n ) )
            edges.emplace_back( at.at( n ), at.at( c ) );
    }
    std::map< std::string, StateSet > labels;
    for ( const auto& [ p, set ] : f.labels() )
    {
        StateSet copy( nodes.size() );
        for ( StateId i = 0; i < nodes.size(); ++i )
            copy[ i ] = set[ nodes[ i ] ];
        labels.emplace( p, copy );
    }
    Annotation theta( nodes.size() ), phi( nodes.size() );
    for ( StateId i = 0; i < nodes.size(); ++i )
    {
        theta.at( i ) = t.theta.at( nodes[ i ] );
        phi.at( i ) = t.phi.at( nodes[ i ] );
    }
    return { TreeFrame( Frame::from_indices( names, edges, labels ), 0 ), std::move( theta ), std::move( phi ) };
}

// Where a state of a pumped tree came from.
struct PumpSource
{
    bool from_donor = false;
    StateId state = 0;
};

struct PumpResult
{
    AnnotatedTree tree;
    std::vector< PumpSource > provenance;
};

// Replaces the subtree at s by donor. Donor states are renamed with a "'"
// suffix (repeated as needed) so that names stay unique.
inline PumpResult pump_with_provenance( const AnnotatedTree& t, StateId s, const AnnotatedTree& donor )
{
    detail::require_state( t, s );
    const auto& f = t.tree.frame();
    const auto& d = donor.tree.frame();
    if ( stripped( t.theta.at( s ) ) != stripped( donor.theta.at( donor.tree.root() ) ) )
        throw RootSetMismatch( "donor root profile differs from the annotation at " + f.name( s ) );

    auto removed = t.tree.subtree( s );
    std::set< StateId > gone( removed.begin(), removed.end() );
    std::vector< PumpSource > provenance;
    std::map< StateId, StateId > kept;
    std::set< std::string > used;
    for ( StateId i = 0; i < f.size(); ++i )
        if ( !gone.contains( i ) )
        {
            kept.emplace( i, provenance.size() );
            provenance.push_back( { false, i } );
            used.insert( f.name( i ) );
        }

    std::string suffix = "'";
    auto clashes = [ & ] {
        return std::any_of( d.names().begin(), d.names().end(), [ & ]( const std::string& n ) { return used.contains( n + suffix ); } );
    };
    while ( clashes() )
        suffix += "'";

    const StateId offset = provenance.size();
    std::vector< std::string > names;
    for ( const auto& [ i, at ] : kept )
        names.push_back( f.name( i ) );
    for ( StateId i = 0; i < d.size(); ++i )
    {
        names.push_back( d.name( i ) + suffix );
        provenance.push_back( { true, i } );
    }

    std::vector< std::pair< StateId, StateId > > edges;
    for ( auto [ a, b ] : f.edges() )
    {
        if ( gone.contains( a ) )
            continue;
        edges.emplace_back( kept.at( a ), b == s ? offset + donor.tree.root() : kept.at( b ) );
    }
    for ( auto [ a, b ] : d.edges() )
        edges.emplace_back( offset + a, offset + b );

    std::set< std::string > props;
    for ( const auto& [ p, set ] : f.labels() )
        props.insert( p );
    for ( const auto& [ p, set ] : d.labels() )
        props.insert( p );
    std::map< std::string, StateSet > labels;
    for ( const auto& p : props )
    {
        StateSet set( names.size() );
        auto mine = f.label( p );
        auto theirs = d.label( p );
        for ( StateId i = 0; i < names.size(); ++i )
            set[ i ] = provenance[ i ].from_donor ? theirs[ provenance[ i ].state ] : mine[ provenance[ i ].state ];
        labels.emplace( p, set );
    }

    Annotation theta( names.size() ), phi( names.size() );
    for ( StateId i = 0; i < names.size(); ++i )
    {
        const auto& src = provenance[ i ].from_donor ? donor : t;
        theta.at( i ) = src.theta.at( provenance[ i ].state );
        phi.at( i ) = src.phi.at( provenance[ i ].state );
    }
    const StateId root = s == t.tree.root() ? offset + donor.tree.root() : kept.at( t.tree.root() );
    AnnotatedTree out( TreeFrame( Frame::from_indices( names, edges, labels ), root ), std::move( theta ), std::move( phi ) );
    return { std::move( out ), std::move( provenance ) };
}

inline AnnotatedTree pump( const AnnotatedTree& t, StateId s, const AnnotatedTree& donor )
{
    return pump_with_provenance( t, s, donor ).tree;
}

namespace detail
{

// AHU-style canonical code: node contents followed by the sorted child codes.
inline std::string canonical_code( const AnnotatedTree& t, StateId s )
{
    const auto& f = t.tree.frame();
    std::string code = "(";
    for ( const auto& [ p, set ] : f.labels() )
        if ( set.test( s ) )
            code += p + ",";
    code += "|";
    for ( const auto& a : t.theta.at( s ) )
        code += to_string( a ) + ";";
    code += "|";
    for ( const auto& a : t.phi.at( s ) )
        code += to_string( a ) + ";";
    std::vector< std::string > children;
    for ( auto c : f.successors( s ) )
        children.push_back( canonical_code( t, c ) );
    std::sort( children.begin(), children.end() );
    for ( const auto& c : children )
        code += c;
    return code + ")";
}

} // namespace detail

// Isomorphism of rooted trees preserving labels, annotation and relevant part.
inline bool isomorphic( const AnnotatedTree& a, const AnnotatedTree& b )
{
    return a.tree.size() == b.tree.size() &&
           detail::canonical_code( a, a.tree.root() ) == detail::canonical_code( b, b.tree.root() );
}

// Lower bound for O(phi, gamma) from a finite family of annotated trees:
// the largest kappa with phi^kappa at a root whose profile is gamma.
struct OEstimate
{
    Ordinal ordinal;
    bool witnessed = false;
    std::size_t witness = 0;
};

inline OEstimate estimate_O( const Formula& phi, const FormulaSet& gamma, const std::vector< AnnotatedTree >& family )
{
    OEstimate out;
    for ( std::size_t i = 0; i < family.size(); ++i )
    {
        const auto& root = family[ i ].theta.at( family[ i ].tree.root() );
        if ( stripped( root ) != gamma )
            continue;
        for ( const auto& a : root )
            if ( a.formula == phi && ( !out.witnessed || out.ordinal < a.ordinal ) )
                out = { a.ordinal, true, i };
    }
    return out;
}

struct NotOptimal
{
    std::size_t witness = 0;
    Ordinal ordinal;
};

struct PossiblyOptimal
{
};

using OptimalityVerdict = std::variant< NotOptimal, PossiblyOptimal >;

// Theta_s is optimal for phi^alpha when O(phi, Theta_s^-) < alpha + w. A
// family can only refute optimality.
inline OptimalityVerdict optimality( const AnnotatedTree& t, StateId s, const AnnotatedFormula& target,
                                     const std::vector< AnnotatedTree >& family )
{
    detail::require_state( t, s );
    if ( !t.theta.at( s ).contains( target ) )
        throw InvalidParameter( "'" + to_string( target ) + "' is not annotated at " + t.tree.frame().name( s ) );
    auto est = estimate_O( target.formula, stripped( t.theta.at( s ) ), family );
    if ( est.witnessed && est.ordinal >= target.ordinal + Ordinal::omega() )
        return NotOptimal{ est.witness, est.ordinal };
    return PossiblyOptimal{};
}

} // namespace nabla
