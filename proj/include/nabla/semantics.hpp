#pragma once

#include "frame.hpp"
#include "ordinal.hpp"
#include "system.hpp"

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nabla
{

// Variables not mentioned denote the empty set.
using Valuation = std::map< std::string, StateSet >;

// The nab clause: states all of whose successors lie in a single member of
// `sets`, or which have a successor lying in every member (the intersection
// of no sets is the whole frame).
inline StateSet nabla_op( const Frame& f, const std::vector< StateSet >& sets )
{
    StateSet meet = f.full_set();
    for ( const auto& u : sets )
        meet &= u;
    StateSet out = f.empty_set();
    for ( StateId v = 0; v < f.size(); ++v )
    {
        const auto& succ = f.successor_set( v );
        if ( succ.intersects( meet ) )
        {
            out.set( v );
            continue;
        }
        for ( const auto& u : sets )
            if ( succ.is_subset_of( u ) )
            {
                out.set( v );
                break;
            }
    }
    return out;
}

inline StateSet box_op( const Frame& f, const StateSet& u )
{
    StateSet out = f.empty_set();
    for ( StateId v = 0; v < f.size(); ++v )
        out[ v ] = f.successor_set( v ).is_subset_of( u );
    return out;
}

inline StateSet dia_op( const Frame& f, const StateSet& u )
{
    StateSet out = f.empty_set();
    for ( StateId v = 0; v < f.size(); ++v )
        out[ v ] = f.successor_set( v ).intersects( u );
    return out;
}

// Denotation of f. Fixpoints are computed by plain Kleene iteration, from
// the empty set for mu and from the full set for nu, afresh at every nesting.
inline StateSet eval( const Formula& phi, const Frame& f, const Valuation& v = {} )
{
    switch ( phi.kind() )
    {
    case Kind::Prop: return f.label( phi.name() );
    case Kind::NegProp: return ~f.label( phi.name() );
    case Kind::Var:
    {
        auto it = v.find( phi.name() );
        if ( it == v.end() )
            return f.empty_set();
        if ( it->second.size() != f.size() )
            throw InvalidParameter( "valuation of '" + phi.name() + "' sized for a different frame" );
        return it->second;
    }
    case Kind::And:
    {
        StateSet out = f.full_set();
        for ( const auto& a : phi.args() )
            out &= eval( a, f, v );
        return out;
    }
    case Kind::Or:
    {
        StateSet out = f.empty_set();
        for ( const auto& a : phi.args() )
            out |= eval( a, f, v );
        return out;
    }
    case Kind::Nabla:
    {
        std::vector< StateSet > sets;
        for ( const auto& a : phi.args() )
            sets.push_back( eval( a, f, v ) );
        return nabla_op( f, sets );
    }
    case Kind::Box: return box_op( f, eval( phi.body(), f, v ) );
    case Kind::Dia: return dia_op( f, eval( phi.body(), f, v ) );
    case Kind::Mu:
    case Kind::Nu:
    {
        Valuation inner = v;
        StateSet current = phi.is( Kind::Mu ) ? f.empty_set() : f.full_set();
        for ( ;; )
        {
            inner[ phi.name() ] = current;
            auto next = eval( phi.body(), f, inner );
            if ( next == current )
                return current;
            current = std::move( next );
        }
    }
    }
    return f.empty_set();
}

// The approximation stages V^0, V^1, ... of a system on a frame, computed on
// demand. V^(n+1)(x) = V^n(x) u [[E(x)]]_{V^n}, which is the union over all
// earlier stages because the stages increase.
class Approximation
{
    EquationSystem _sys;
    Frame _frame;
    std::deque< Valuation > _stages; // deque: references to stages stay valid
    std::optional< std::size_t > _stable_at;

    void extend()
    {
        const auto& last = _stages.back();
        Valuation next;
        for ( const auto& x : _sys.vars() )
            next[ x ] = last.at( x ) | eval( _sys.equation( x ), _frame, last );
        if ( next == last && !_stable_at )
            _stable_at = _stages.size() - 1;
        _stages.push_back( std::move( next ) );
    }

public:
    Approximation( EquationSystem sys, Frame frame ) : _sys{ std::move( sys ) }, _frame{ std::move( frame ) }
    {
        Valuation zero;
        for ( const auto& x : _sys.vars() )
            zero[ x ] = _frame.empty_set();
        _stages.push_back( std::move( zero ) );
    }

    [[nodiscard]] const EquationSystem& system() const { return _sys; }
    [[nodiscard]] const Frame& frame() const { return _frame; }

    const Valuation& stage( std::size_t n )
    {
        if ( _stable_at && n > *_stable_at )
            return _stages[ *_stable_at ];
        while ( _stages.size() <= n )
        {
            extend();
            if ( _stable_at && n > *_stable_at )
                return _stages[ *_stable_at ];
        }
        return _stages[ n ];
    }

    // Least H with V^H = V^(H+1); bounded by |S|.|X| since every earlier step
    // adds at least one (state, variable) pair.
    std::size_t stable_index()
    {
        while ( !_stable_at )
            extend();
        return *_stable_at;
    }

    const Valuation& stable() { return stage( stable_index() ); }

    // Stage alpha for any ordinal: infinite stages coincide with the stable one.
    const Valuation& stage( const Ordinal& alpha )
    {
        if ( auto n = alpha.as_natural() )
            return stage( static_cast< std::size_t >( *n ) );
        return stable();
    }

    StateSet approx( const Formula& psi, std::size_t n ) { return eval( psi, _frame, stage( n ) ); }
    StateSet approx( const Formula& psi, const Ordinal& alpha ) { return eval( psi, _frame, stage( alpha ) ); }
    StateSet denotation( const Formula& psi ) { return eval( psi, _frame, stable() ); }
};

// [[psi]] under V^n.
inline StateSet approx( const Formula& psi, std::size_t n, const EquationSystem& sys, const Frame& f )
{
    Approximation a( sys, f );
    return a.approx( psi, n );
}

inline StateSet denotation( const EquationalFormula& ef, const Frame& f )
{
    Approximation a( ef.system(), f );
    return a.stable().at( ef.init() );
}

// Least kappa with V^kappa(init) equal to the stabilised denotation of init.
inline std::size_t closure_ordinal_on( const Frame& f, const EquationalFormula& ef )
{
    Approximation a( ef.system(), f );
    const auto target = a.stable().at( ef.init() );
    std::size_t k = 0;
    while ( a.stage( k ).at( ef.init() ) != target )
        ++k;
    return k;
}

// Signature semantics: variable x_i at signature a is the union over b < a_i
// of E(x_i) at the signature with a_i replaced by b. Entries follow the
// system's declaration order.
class SignatureApproximation
{
    EquationSystem _sys;
    Frame _frame;
    std::map< std::vector< std::size_t >, Valuation > _memo;

public:
    SignatureApproximation( EquationSystem sys, Frame frame ) : _sys{ std::move( sys ) }, _frame{ std::move( frame ) } {}

    const Valuation& valuation( const std::vector< std::size_t >& sig )
    {
        if ( sig.size() != _sys.var_count() )
            throw InvalidParameter( "signature length differs from the number of variables" );
        if ( auto it = _memo.find( sig ); it != _memo.end() )
            return it->second;
        Valuation out;
        const auto& vars = _sys.vars();
        for ( std::size_t i = 0; i < vars.size(); ++i )
        {
            StateSet u = _frame.empty_set();
            auto lowered = sig;
            for ( std::size_t b = 0; b < sig[ i ]; ++b )
            {
                lowered[ i ] = b;
                u |= eval( _sys.equation( vars[ i ] ), _frame, valuation( lowered ) );
            }
            out[ vars[ i ] ] = std::move( u );
        }
        return _memo.emplace( sig, std::move( out ) ).first->second;
    }

    StateSet approx( const Formula& psi, const std::vector< std::size_t >& sig )
    {
        return eval( psi, _frame, valuation( sig ) );
    }
};

inline StateSet sig_approx( const Formula& psi, const std::vector< std::size_t >& sig, const EquationSystem& sys, const Frame& f )
{
    SignatureApproximation a( sys, f );
    return a.approx( psi, sig );
}

} // namespace nabla
