#pragma once

#include "error.hpp"
#include "frame.hpp"
#include "ordinal.hpp"
#include "semantics.hpp"
#include "system.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nabla
{

// phi^alpha
struct AnnotatedFormula
{
    Formula formula;
    Ordinal ordinal;

    friend bool operator==( const AnnotatedFormula&, const AnnotatedFormula& ) = default;
    friend std::strong_ordering operator<=>( const AnnotatedFormula& a, const AnnotatedFormula& b )
    {
        if ( auto c = a.formula <=> b.formula; c != 0 )
            return c;
        return a.ordinal <=> b.ordinal;
    }
};

inline std::string to_string( const AnnotatedFormula& a ) { return to_string( a.formula ) + " @ " + to_string( a.ordinal ); }

// Sorted by formula, then ordinal, so all entries for one formula are adjacent
// and the first of them carries the least ordinal.
using AnnSet = std::set< AnnotatedFormula >;

// Theta^-
inline FormulaSet stripped( const AnnSet& set )
{
    FormulaSet out;
    for ( const auto& a : set )
        out.insert( a.formula );
    return out;
}

inline std::optional< Ordinal > min_ordinal( const AnnSet& set, const Formula& phi )
{
    auto it = set.lower_bound( { phi, Ordinal() } );
    if ( it == set.end() || it->formula != phi )
        return std::nullopt;
    return it->ordinal;
}

inline bool contains( const AnnSet& set, const Formula& phi, const Ordinal& alpha ) { return set.contains( { phi, alpha } ); }

// Gamma^alpha
inline AnnSet lift( const FormulaSet& gamma, const Ordinal& alpha )
{
    AnnSet out;
    for ( const auto& g : gamma )
        out.insert( { g, alpha } );
    return out;
}

// a <= b: every phi^alpha in b is matched in a by some phi^beta with beta <= alpha.
inline bool preceq( const AnnSet& a, const AnnSet& b )
{
    for ( const auto& [ phi, alpha ] : b )
    {
        auto least = min_ordinal( a, phi );
        if ( !least || *least > alpha )
            return false;
    }
    return true;
}

// A map from the states of a frame to annotation sets.
class Annotation
{
    std::vector< AnnSet > _sets;

public:
    Annotation() = default;
    explicit Annotation( std::size_t states ) : _sets( states ) {}

    [[nodiscard]] std::size_t size() const { return _sets.size(); }
    [[nodiscard]] const AnnSet& at( StateId s ) const { return _sets.at( s ); }
    AnnSet& at( StateId s ) { return _sets.at( s ); }
    void insert( StateId s, const Formula& phi, const Ordinal& alpha ) { _sets.at( s ).insert( { phi, alpha } ); }
    bool erase( StateId s, const Formula& phi, const Ordinal& alpha ) { return _sets.at( s ).erase( { phi, alpha } ) > 0; }

    [[nodiscard]] bool empty() const
    {
        return std::all_of( _sets.begin(), _sets.end(), []( const AnnSet& s ) { return s.empty(); } );
    }

    [[nodiscard]] std::size_t entry_count() const
    {
        std::size_t n = 0;
        for ( const auto& s : _sets )
            n += s.size();
        return n;
    }

    friend bool operator==( const Annotation&, const Annotation& ) = default;
};

inline bool preceq( const Annotation& a, const Annotation& b )
{
    if ( a.size() != b.size() )
        throw InvalidParameter( "annotations of different frames" );
    for ( StateId s = 0; s < a.size(); ++s )
        if ( !preceq( a.at( s ), b.at( s ) ) )
            return false;
    return true;
}

// A broken definition clause at a state. Clause ids:
//   D3.1-1 .. D3.1-5   well-annotation clauses (5: neither 5a nor 5b holds)
//   D3.2-1, D3.2-2     conservativity: duplicate ordinals; entry differing
//                      from the least-stage construction (missing, spurious or
//                      non-minimal)
//   D3.5-1 .. D3.5-5c  relevant-part clauses
//   P3.6-2             more than one relevant nab at a state
struct Violation
{
    StateId state = 0;
    std::string clause;
    std::optional< AnnotatedFormula > formula;
    std::string detail;
};

inline std::string to_string( const Violation& v, const Frame& f )
{
    std::string out = v.clause + " at " + f.name( v.state );
    if ( v.formula )
        out += ": " + to_string( *v.formula );
    if ( !v.detail.empty() )
        out += " (" + v.detail + ")";
    return out;
}

namespace detail
{

inline void require_same_size( const Annotation& theta, const Frame& f )
{
    if ( theta.size() != f.size() )
        throw InvalidParameter( "annotation has " + std::to_string( theta.size() ) + " states, frame has "
                                + std::to_string( f.size() ) );
}

inline void require_in_closure( const AnnotatedFormula& a, const FormulaSet& cl, const Frame& f, StateId s )
{
    if ( !cl.contains( a.formula ) )
        throw ForeignFormula( "formula '" + to_string( a.formula ) + "' at state '" + f.name( s )
                              + "' is not in the closure of the system" );
}

} // namespace detail

// Formulas an annotation may mention: the closure plus the variables
// themselves, which the closure omits when no equation refers to them.
inline FormulaSet annotation_universe( const EquationSystem& sys )
{
    auto out = closure( sys );
    for ( const auto& x : sys.vars() )
        out.insert( var( x ) );
    return out;
}

inline std::vector< Violation > check_well_annotation( const Annotation& theta, const EquationSystem& sys, const Frame& f )
{
    detail::require_same_size( theta, f );
    const auto cl = annotation_universe( sys );
    std::map< Formula, StateSet > closed_truth;
    auto holds = [ & ]( const Formula& phi, StateId s ) {
        auto it = closed_truth.find( phi );
        if ( it == closed_truth.end() )
            it = closed_truth.emplace( phi, eval( phi, f ) ).first;
        return it->second.test( s );
    };
    auto le = [ & ]( StateId r, const Formula& g, const Ordinal& alpha ) {
        auto m = min_ordinal( theta.at( r ), g );
        return m && *m <= alpha;
    };

    std::vector< Violation > out;
    for ( StateId s = 0; s < f.size(); ++s )
        for ( const auto& a : theta.at( s ) )
        {
            detail::require_in_closure( a, cl, f, s );
            const auto& [ phi, alpha ] = a;
            if ( phi.is_closed() && !holds( phi, s ) )
                out.push_back( { s, "D3.1-1", a, "closed formula false at this state" } );
            switch ( phi.kind() )
            {
            case Kind::Var:
            {
                auto least = min_ordinal( theta.at( s ), sys.equation( phi.name() ) );
                if ( !least || *least >= alpha )
                    out.push_back( { s, "D3.1-2", a, "no defining formula with a smaller annotation" } );
                break;
            }
            case Kind::Or:
                if ( std::none_of( phi.args().begin(), phi.args().end(),
                                   [ & ]( const Formula& g ) { return le( s, g, alpha ); } ) )
                    out.push_back( { s, "D3.1-3", a, "no disjunct annotated at most as high" } );
                break;
            case Kind::And:
                for ( const auto& g : phi.args() )
                    if ( !le( s, g, alpha ) )
                    {
                        out.push_back( { s, "D3.1-4", a, "conjunct '" + to_string( g ) + "' missing or annotated higher" } );
                        break;
                    }
                break;
            case Kind::Nabla:
            {
                auto succ = f.successors( s );
                bool some_successor = std::any_of( succ.begin(), succ.end(), [ & ]( StateId r ) {
                    return std::all_of( phi.args().begin(), phi.args().end(),
                                        [ & ]( const Formula& g ) { return le( r, g, alpha ); } );
                } );
                bool some_member = std::any_of( phi.args().begin(), phi.args().end(), [ & ]( const Formula& g ) {
                    return std::all_of( succ.begin(), succ.end(), [ & ]( StateId r ) { return le( r, g, alpha ); } );
                } );
                if ( !some_successor && !some_member )
                    out.push_back( { s, "D3.1-5", a, "neither a successor covering all members nor a member covering all successors" } );
                break;
            }
            default: break;
            }
        }
    return out;
}

// phi^alpha in Theta_s iff s in [[phi]] and alpha is the least stage with s in
// [[phi^alpha]]. On finite frames every alpha is a natural number.
inline Annotation conservative( const EquationSystem& sys, const Frame& f )
{
    Approximation approx( sys, f );
    const auto h = approx.stable_index();
    Annotation theta( f.size() );
    for ( const auto& phi : annotation_universe( sys ) )
    {
        StateSet seen = f.empty_set();
        const std::size_t last = phi.is_closed() ? 0 : h;
        for ( std::size_t n = 0; n <= last; ++n )
        {
            auto now = approx.approx( phi, n );
            auto fresh = now - seen;
            for ( auto s = fresh.find_first(); s != StateSet::npos; s = fresh.find_next( s ) )
                theta.insert( s, phi, Ordinal::natural( n ) );
            seen |= now;
        }
    }
    return theta;
}

// Empty iff theta coincides with the least-stage construction.
inline std::vector< Violation > verify_conservative( const Annotation& theta, const EquationSystem& sys, const Frame& f )
{
    detail::require_same_size( theta, f );
    const auto cl = annotation_universe( sys );
    const auto expected = conservative( sys, f );
    std::vector< Violation > out;
    for ( StateId s = 0; s < f.size(); ++s )
    {
        const auto& mine = theta.at( s );
        const auto& want = expected.at( s );
        std::optional< Formula > previous;
        for ( const auto& a : mine )
        {
            detail::require_in_closure( a, cl, f, s );
            if ( previous && *previous == a.formula )
                out.push_back( { s, "D3.2-1", a, "more than one annotation for this formula" } );
            previous = a.formula;
            auto least = min_ordinal( want, a.formula );
            if ( !least )
                out.push_back( { s, "D3.2-2", a, "formula does not hold here" } );
            else if ( *least != a.ordinal )
                out.push_back( { s, "D3.2-2", a, "least annotation is " + to_string( *least ) } );
        }
        for ( const auto& a : want )
            if ( !min_ordinal( mine, a.formula ) )
                out.push_back( { s, "D3.2-2", a, "missing entry" } );
    }
    return out;
}

// Members of gamma present at every successor of s (all of gamma at a deadlock).
inline FormulaSet box_set( const FormulaSet& gamma, StateId s, const Annotation& theta, const Frame& f )
{
    FormulaSet out;
    for ( const auto& g : gamma )
    {
        auto succ = f.successors( s );
        if ( std::all_of( succ.begin(), succ.end(), [ & ]( StateId t ) { return min_ordinal( theta.at( t ), g ).has_value(); } ) )
            out.insert( g );
    }
    return out;
}

// Successors of s carrying every member of gamma.
inline std::vector< StateId > dia_set( const FormulaSet& gamma, StateId s, const Annotation& theta, const Frame& f )
{
    std::vector< StateId > out;
    for ( auto t : f.successors( s ) )
        if ( std::all_of( gamma.begin(), gamma.end(), [ & ]( const Formula& g ) { return min_ordinal( theta.at( t ), g ).has_value(); } ) )
            out.push_back( t );
    return out;
}

inline FormulaSet args_of( const Formula& f ) { return { f.args().begin(), f.args().end() }; }

// Checks phi against every relevant-part clause for theta, plus the "one
// relevant nab per state" condition.
inline std::vector< Violation > check_relevant( const Annotation& phi, const Annotation& theta, const EquationSystem& sys,
                                                const Frame& f )
{
    detail::require_same_size( phi, f );
    detail::require_same_size( theta, f );
    std::vector< Violation > out;
    for ( StateId s = 0; s < f.size(); ++s )
    {
        const auto& here = phi.at( s );
        std::set< Formula > nablas;
        for ( const auto& a : here )
        {
            const auto& [ psi, alpha ] = a;
            if ( !theta.at( s ).contains( a ) )
                out.push_back( { s, "D3.5-1", a, "not in the underlying annotation" } );
            switch ( psi.kind() )
            {
            case Kind::Var:
                if ( classify( alpha ) != OrdinalKind::Successor )
                    out.push_back( { s, "D3.5-2", a, "annotation is not a successor ordinal" } );
                else if ( !contains( here, sys.equation( psi.name() ), pred( alpha ) ) )
                    out.push_back( { s, "D3.5-2", a, "defining formula not relevant at " + to_string( pred( alpha ) ) } );
                break;
            case Kind::Or:
                if ( alpha.is_zero() )
                    break;
                for ( const auto& g : psi.args() )
                    if ( contains( theta.at( s ), g, alpha ) && !contains( here, g, alpha ) )
                        out.push_back( { s, "D3.5-3", a, "disjunct '" + to_string( g ) + "' shares the annotation but is not relevant" } );
                break;
            case Kind::And:
            {
                auto marked = std::count_if( psi.args().begin(), psi.args().end(),
                                             [ & ]( const Formula& g ) { return contains( here, g, alpha ); } );
                if ( marked != 1 )
                    out.push_back( { s, "D3.5-4", a, std::to_string( marked ) + " conjuncts relevant at this annotation" } );
                break;
            }
            case Kind::Nabla:
            {
                nablas.insert( psi );
                if ( alpha.is_zero() )
                    break;
                const auto gamma = args_of( psi );
                for ( const auto& g : box_set( gamma, s, theta, f ) )
                {
                    // "for all eta < alpha some beta > eta" over finitely many
                    // candidates amounts to some beta >= alpha.
                    bool found = false;
                    for ( auto r : f.successors( s ) )
                    {
                        auto it = phi.at( r ).lower_bound( { g, alpha } );
                        found = found || ( it != phi.at( r ).end() && it->formula == g );
                    }
                    if ( !found )
                        out.push_back( { s, "D3.5-5a", a, "'" + to_string( g ) + "' not relevant at any successor with annotation >= " + to_string( alpha ) } );
                }
                for ( auto r : dia_set( gamma, s, theta, f ) )
                {
                    auto marked = stripped( phi.at( r ) );
                    if ( std::none_of( gamma.begin(), gamma.end(), [ & ]( const Formula& g ) { return marked.contains( g ); } ) )
                        out.push_back( { s, "D3.5-5b", a, "successor '" + f.name( r ) + "' carries no relevant member" } );
                }
                const auto floor = pred( alpha );
                for ( auto r : f.successors( s ) )
                {
                    if ( phi.at( r ).empty() )
                        continue;
                    bool ok = std::any_of( phi.at( r ).begin(), phi.at( r ).end(), [ & ]( const AnnotatedFormula& b ) {
                        return gamma.contains( b.formula ) && b.ordinal > floor;
                    } );
                    if ( !ok )
                        out.push_back( { s, "D3.5-5c", a, "successor '" + f.name( r ) + "' has no relevant member above " + to_string( floor ) } );
                }
                break;
            }
            default: break;
            }
        }
        if ( nablas.size() > 1 )
            out.push_back( { s, "P3.6-2", std::nullopt, std::to_string( nablas.size() ) + " distinct relevant nab formulas" } );
    }
    return out;
}

// Entries phi^alpha with s outside [[phi^alpha]] (natural annotations only;
// transfinite ones are checked against the stable stage).
inline std::vector< std::pair< StateId, AnnotatedFormula > > unsatisfied_entries( const Annotation& theta,
                                                                                  const EquationSystem& sys, const Frame& f )
{
    detail::require_same_size( theta, f );
    Approximation approx( sys, f );
    std::vector< std::pair< StateId, AnnotatedFormula > > out;
    for ( StateId s = 0; s < f.size(); ++s )
        for ( const auto& a : theta.at( s ) )
            if ( !approx.approx( a.formula, a.ordinal ).test( s ) )
                out.emplace_back( s, a );
    return out;
}

// Output of relevant-part extraction: a tree (the input with some subtrees
// duplicated), its conservative annotation and a relevant part of it.
struct RelevantPart
{
    TreeFrame tree;
    Annotation theta;
    Annotation phi;
    // origin[i]: the input state node i copies.
    std::vector< StateId > origin;
};

namespace detail
{

class RelevantExtractor
{
    struct Node
    {
        StateId origin;
        std::string name;
        std::vector< std::size_t > children;
    };

    const TreeFrame& _input;
    const Annotation& _theta;
    const EquationSystem& _sys;
    std::vector< Node > _nodes;
    std::vector< AnnSet > _marks;
    std::size_t _clones = 0;

    const AnnSet& theta_at( std::size_t n ) const { return _theta.at( _nodes[ n ].origin ); }

    [[noreturn]] void fail( std::size_t n, const std::string& what ) const
    {
        throw ExtractionFailure( "at state '" + _nodes[ n ].name + "': " + what );
    }

    std::size_t clone( std::size_t n )
    {
        const auto suffix = "~" + std::to_string( ++_clones );
        std::vector< std::pair< std::size_t, std::size_t > > stack{ { n, _nodes.size() } };
        _nodes.push_back( { _nodes[ n ].origin, _nodes[ n ].name + suffix, {} } );
        _marks.emplace_back();
        const auto root = _nodes.size() - 1;
        while ( !stack.empty() )
        {
            auto [ from, to ] = stack.back();
            stack.pop_back();
            for ( auto c : std::vector< std::size_t >( _nodes[ from ].children ) )
            {
                _nodes.push_back( { _nodes[ c ].origin, _nodes[ c ].name + suffix, {} } );
                _marks.emplace_back();
                _nodes[ to ].children.push_back( _nodes.size() - 1 );
                stack.emplace_back( c, _nodes.size() - 1 );
            }
        }
        return root;
    }

    // Picks the conjunct carrying exactly the conjunction's annotation, first
    // in the canonical order.
    Formula choose_conjunct( std::size_t n, const Formula& psi, const Ordinal& alpha ) const
    {
        for ( const auto& g : psi.args() )
            if ( contains( theta_at( n ), g, alpha ) )
                return g;
        fail( n, "no conjunct of '" + to_string( psi ) + "' annotated " + to_string( alpha ) );
    }

    // At annotation 0 no disjunct is forced; one witness is marked, closed
    // ones preferred.
    std::optional< Formula > witness_disjunct( std::size_t n, const Formula& psi ) const
    {
        std::optional< Formula > open;
        for ( const auto& g : psi.args() )
            if ( contains( theta_at( n ), g, Ordinal() ) )
            {
                if ( g.is_closed() )
                    return g;
                if ( !open )
                    open = g;
            }
        return open;
    }

    // Marks psi^alpha at n and everything it forces at n; returns the demands
    // it places on successors.
    void mark( std::size_t n, const Formula& psi, const Ordinal& alpha,
               std::vector< std::pair< std::size_t, AnnotatedFormula > >& demands )
    {
        if ( !contains( theta_at( n ), psi, alpha ) )
            fail( n, "'" + to_string( AnnotatedFormula{ psi, alpha } ) + "' is not in the annotation" );
        if ( !_marks[ n ].insert( { psi, alpha } ).second )
            return;
        switch ( psi.kind() )
        {
        case Kind::Var:
            if ( classify( alpha ) != OrdinalKind::Successor )
                fail( n, "variable '" + psi.name() + "' annotated by a non-successor" );
            mark( n, _sys.equation( psi.name() ), pred( alpha ), demands );
            break;
        case Kind::Or:
            if ( alpha.is_zero() )
            {
                if ( auto w = witness_disjunct( n, psi ) )
                    mark( n, *w, alpha, demands );
                break;
            }
            for ( const auto& g : psi.args() )
                if ( contains( theta_at( n ), g, alpha ) )
                    mark( n, g, alpha, demands );
            break;
        case Kind::And: mark( n, choose_conjunct( n, psi, alpha ), alpha, demands ); break;
        case Kind::Nabla:
            if ( !alpha.is_zero() )
                modal_demands( n, psi, alpha, demands );
            break;
        default: break;
        }
    }

    std::optional< Ordinal > ann( std::size_t r, const Formula& g ) const { return min_ordinal( theta_at( r ), g ); }

    void modal_demands( std::size_t n, const Formula& psi, const Ordinal& alpha,
                        std::vector< std::pair< std::size_t, AnnotatedFormula > >& demands )
    {
        const auto& kids = _nodes[ n ].children;
        // Each box-set member needs one successor where it reaches alpha; the
        // successor carrying its highest annotation is used.
        for ( const auto& g : psi.args() )
        {
            bool everywhere = std::all_of( kids.begin(), kids.end(), [ & ]( std::size_t r ) { return ann( r, g ).has_value(); } );
            if ( !everywhere || kids.empty() )
                continue;
            std::size_t best = kids.front();
            for ( auto r : kids )
                if ( *ann( r, g ) > *ann( best, g ) )
                    best = r;
            if ( *ann( best, g ) < alpha )
                fail( n, "'" + to_string( g ) + "' stays below " + to_string( alpha ) + " at every successor" );
            demands.emplace_back( best, AnnotatedFormula{ g, *ann( best, g ) } );
        }
        // Every successor carrying all members gets its highest-annotated member.
        for ( auto r : kids )
        {
            bool all = std::all_of( psi.args().begin(), psi.args().end(), [ & ]( const Formula& g ) { return ann( r, g ).has_value(); } );
            if ( !all || psi.args().empty() )
                continue;
            auto best = psi.args().front();
            for ( const auto& g : psi.args() )
                if ( *ann( r, g ) > *ann( r, best ) )
                    best = g;
            if ( *ann( r, best ) <= pred( alpha ) )
                fail( n, "successor '" + _nodes[ r ].name + "' has no member above " + to_string( pred( alpha ) ) );
            demands.emplace_back( r, AnnotatedFormula{ best, *ann( r, best ) } );
        }
    }

public:
    RelevantExtractor( const TreeFrame& input, const Annotation& theta, const EquationSystem& sys )
            : _input{ input }, _theta{ theta }, _sys{ sys }
    {
        const auto& f = input.frame();
        for ( StateId s = 0; s < f.size(); ++s )
        {
            auto succ = f.successors( s );
            _nodes.push_back( { s, f.name( s ), { succ.begin(), succ.end() } } );
        }
        _marks.assign( f.size(), {} );
    }

    RelevantPart run( const std::string& x, const Ordinal& alpha )
    {
        const auto root = _input.root();
        std::vector< std::pair< std::size_t, AnnotatedFormula > > queue{ { root, { var( x ), alpha } } };
        for ( std::size_t i = 0; i < queue.size(); ++i )
        {
            auto [ n, demand ] = queue[ i ];
            std::vector< std::pair< std::size_t, AnnotatedFormula > > demands;
            mark( n, demand.formula, demand.ordinal, demands );
            // One demand per successor: further distinct demands go to copies.
            std::map< std::size_t, std::vector< AnnotatedFormula > > per_child;
            for ( const auto& [ r, d ] : demands )
            {
                auto& list = per_child[ r ];
                if ( std::find( list.begin(), list.end(), d ) == list.end() )
                    list.push_back( d );
            }
            for ( auto& [ r, list ] : per_child )
            {
                queue.emplace_back( r, list.front() );
                for ( std::size_t k = 1; k < list.size(); ++k )
                {
                    auto copy = clone( r );
                    _nodes[ n ].children.push_back( copy );
                    queue.emplace_back( copy, list[ k ] );
                }
            }
        }
        return assemble();
    }

private:
    RelevantPart assemble() const
    {
        std::vector< std::string > names;
        std::vector< std::pair< StateId, StateId > > edges;
        std::vector< StateId > origin;
        for ( std::size_t n = 0; n < _nodes.size(); ++n )
        {
            names.push_back( _nodes[ n ].name );
            origin.push_back( _nodes[ n ].origin );
            for ( auto c : _nodes[ n ].children )
                edges.emplace_back( n, c );
        }
        std::map< std::string, StateSet > labels;
        for ( const auto& [ p, set ] : _input.frame().labels() )
        {
            StateSet copy( _nodes.size() );
            for ( std::size_t n = 0; n < _nodes.size(); ++n )
                copy[ n ] = set[ origin[ n ] ];
            labels.emplace( p, copy );
        }
        TreeFrame tree( Frame::from_indices( names, edges, labels ), _input.root() );
        Annotation theta( _nodes.size() ), phi( _nodes.size() );
        for ( std::size_t n = 0; n < _nodes.size(); ++n )
        {
            theta.at( n ) = _theta.at( origin[ n ] );
            phi.at( n ) = _marks[ n ];
        }
        return { std::move( tree ), std::move( theta ), std::move( phi ), std::move( origin ) };
    }
};

} // namespace detail

// Traces x^alpha at the root of a tree with conservative annotation theta
// into a relevant part, duplicating successor subtrees so that each state
// receives a single trace. The result is re-verified; a failed clause is
// raised as ExtractionFailure.
inline RelevantPart extract_relevant( const TreeFrame& tree, const Annotation& theta, const EquationSystem& sys,
                                      const std::string& x, const Ordinal& alpha )
{
    detail::require_same_size( theta, tree.frame() );
    if ( !sys.contains( x ) )
        throw UnboundVariable( "no equation for '" + x + "'" );
    if ( !contains( theta.at( tree.root() ), var( x ), alpha ) )
        throw ExtractionFailure( "'" + x + " @ " + to_string( alpha ) + "' is not annotated at the root" );
    auto part = detail::RelevantExtractor( tree, theta, sys ).run( x, alpha );
    if ( conservative( sys, part.tree.frame() ) != part.theta )
        throw ExtractionFailure( "copied annotation is not conservative on the duplicated tree" );
    auto violations = check_relevant( part.phi, part.theta, sys, part.tree.frame() );
    if ( !violations.empty() )
        throw ExtractionFailure( to_string( violations.front(), part.tree.frame() ) );
    return part;
}

// Uses the root's own annotation of x.
inline RelevantPart extract_relevant( const TreeFrame& tree, const Annotation& theta, const EquationSystem& sys,
                                      const std::string& x )
{
    if ( !sys.contains( x ) )
        throw UnboundVariable( "no equation for '" + x + "'" );
    auto alpha = min_ordinal( theta.at( tree.root() ), var( x ) );
    if ( !alpha )
        throw ExtractionFailure( "'" + x + "' is not annotated at the root" );
    return extract_relevant( tree, theta, sys, x, *alpha );
}

} // namespace nabla
