#pragma once

#include "frame.hpp"
#include "semantics.hpp"

#include <functional>
#include <map>
#include <set>

namespace nabla
{

// A variable the translation introduced, with what it stands for.
struct FreshVariable
{
    std::string name;
    std::string role;
    Formula meaning;
};

// Result of comparing two equational formulas frame by frame.
struct OracleVerdict
{
    std::size_t frames_checked = 0;
    std::size_t mismatches = 0;
    std::optional< std::string > first_mismatch;
    // Per-frame closure ordinals (input, output); diagnostics only.
    std::vector< std::pair< std::size_t, std::size_t > > closure_ordinals;

    [[nodiscard]] bool equivalent() const { return mismatches == 0; }
};

struct OracleOptions
{
    std::size_t exhaustive_states = 3;
    std::size_t random_count = 500;
    std::size_t random_max_states = 8;
    std::uint64_t seed = 0x5eed;
};

struct TranslationReport
{
    EquationalFormula input;
    EquationalFormula output;
    std::vector< FreshVariable > fresh;
    OracleVerdict oracle;
};

namespace detail
{

inline std::vector< std::string > props_of( const EquationSystem& sys, std::set< std::string > out = {} )
{
    for ( const auto& [ x, body ] : sys.equations() )
        collect_props( body, out );
    return { out.begin(), out.end() };
}

// Exhaustive enumeration is costly, so each proposition list is enumerated once.
inline const std::vector< Frame >& exhaustive_frames( std::size_t states, const std::vector< std::string >& props )
{
    static std::map< std::pair< std::size_t, std::vector< std::string > >, std::vector< Frame > > cache;
    auto key = std::pair{ states, props };
    auto it = cache.find( key );
    if ( it == cache.end() )
        it = cache.emplace( key, enumerate_frames( states, props ) ).first;
    return it->second;
}

inline std::pair< StateSet, std::size_t > denotation_and_co( const EquationalFormula& ef, const Frame& f )
{
    Approximation a( ef.system(), f );
    auto target = a.stable().at( ef.init() );
    std::size_t k = 0;
    while ( a.stage( k ).at( ef.init() ) != target )
        ++k;
    return { target, k };
}

} // namespace detail

// Compares the denotations of a and b on every frame with at most
// exhaustive_states states and on a seeded random sample.
inline OracleVerdict check_equivalence( const EquationalFormula& a, const EquationalFormula& b, const OracleOptions& options = {} )
{
    auto from_a = detail::props_of( a.system() );
    auto props = detail::props_of( b.system(), { from_a.begin(), from_a.end() } );
    OracleVerdict out;
    auto check = [ & ]( const Frame& f ) {
        auto [ da, ca ] = detail::denotation_and_co( a, f );
        auto [ db, cb ] = detail::denotation_and_co( b, f );
        ++out.frames_checked;
        out.closure_ordinals.emplace_back( ca, cb );
        if ( da != db )
        {
            ++out.mismatches;
            if ( !out.first_mismatch )
                out.first_mismatch = to_text( f );
        }
    };
    if ( options.exhaustive_states > 0 )
        for ( const auto& f : detail::exhaustive_frames( options.exhaustive_states, props ) )
            check( f );
    for ( const auto& f : random_frames( options.random_count, options.random_max_states, props, options.seed ) )
        check( f );
    return out;
}

namespace detail
{

class NameSupply
{
    std::set< std::string > _taken;
    std::size_t _next = 0;

public:
    explicit NameSupply( std::set< std::string > taken = {} ) : _taken{ std::move( taken ) } {}

    void reserve( const std::string& n ) { _taken.insert( n ); }
    [[nodiscard]] bool taken( const std::string& n ) const { return _taken.contains( n ); }

    std::string fresh()
    {
        for ( ;; )
        {
            auto n = "_y" + std::to_string( _next++ );
            if ( _taken.insert( n ).second )
                return n;
        }
    }
};

// Replaces variables outside any nab by lookup(x).
inline Formula replace_unguarded( const Formula& f, const std::function< Formula( const std::string& ) >& lookup )
{
    if ( f.is( Kind::Var ) )
        return lookup( f.name() );
    if ( f.is_closed() || !( f.is( Kind::And ) || f.is( Kind::Or ) ) )
        return f;
    std::vector< Formula > args;
    for ( const auto& a : f.args() )
        args.push_back( replace_unguarded( a, lookup ) );
    return rebuild( f, std::move( args ) );
}

class EquationalBuilder
{
    NameSupply _names;
    std::vector< std::string > _order;
    std::map< std::string, Formula > _raw;
    std::map< std::string, Formula > _resolved;

    Formula translate( const Formula& f, const std::map< std::string, std::string >& env )
    {
        switch ( f.kind() )
        {
        case Kind::Var:
        {
            auto it = env.find( f.name() );
            if ( it == env.end() )
                throw UnboundVariable( "free variable '" + f.name() + "'" );
            return var( it->second );
        }
        case Kind::Prop:
        case Kind::NegProp: return f;
        case Kind::And:
        case Kind::Or:
        case Kind::Nabla:
        {
            std::vector< Formula > args;
            for ( const auto& a : f.args() )
                args.push_back( translate( a, env ) );
            return rebuild( f, std::move( args ) );
        }
        case Kind::Nu:
            if ( !f.is_closed() )
                throw NotSigmaFragment( "nu binds over outer variables: " + to_string( f ) );
            return f;
        case Kind::Mu:
        {
            auto name = _names.taken( f.name() ) ? _names.fresh() : f.name();
            _names.reserve( name );
            _order.push_back( name );
            auto inner = env;
            inner[ f.name() ] = name;
            _raw.emplace( name, translate( f.body(), inner ) );
            return var( name );
        }
        default: return translate( desugar( f ), env );
        }
    }

    // Body of x with unguarded variables replaced by their own resolved bodies.
    const Formula& resolve( const std::string& x, std::vector< std::string >& stack )
    {
        if ( auto it = _resolved.find( x ); it != _resolved.end() )
            return it->second;
        stack.push_back( x );
        auto body = replace_unguarded( _raw.at( x ), [ & ]( const std::string& y ) {
            if ( std::find( stack.begin(), stack.end(), y ) != stack.end() )
                throw UnguardedVariable( "'" + y + "' occurs outside any nab in its own unfolding" );
            return resolve( y, stack );
        } );
        stack.pop_back();
        return _resolved.emplace( x, body ).first->second;
    }

public:
    EquationalFormula run( const Formula& phi )
    {
        auto input = desugar( phi );
        std::set< std::string > props;
        collect_props( input, props );
        _names = NameSupply( props );
        auto top = translate( input, {} );
        std::string init;
        if ( input.is( Kind::Mu ) )
            init = top.name();
        else
        {
            init = _names.fresh();
            _order.insert( _order.begin(), init );
            if ( top.is_closed() )
            {
                auto bottom = _names.fresh();
                _order.push_back( bottom );
                _raw.emplace( init, conj( { disj( { top, nab( { var( bottom ) } ) } ), disj( { top, nab( {} ) } ) } ) );
                _raw.emplace( bottom, conj( { nab( { var( bottom ) } ), nab( {} ) } ) );
            }
            else
                _raw.emplace( init, top );
        }
        std::vector< std::pair< std::string, Formula > > eqs;
        for ( const auto& x : _order )
        {
            std::vector< std::string > stack;
            eqs.emplace_back( x, resolve( x, stack ) );
        }
        return { EquationSystem( eqs ), init };
    }
};

} // namespace detail

// Replaces the external mu-binders of a Sigma-formula by equations. A formula
// that is not itself a mu gets a fresh initial variable.
inline EquationalFormula to_equational( const Formula& phi )
{
    return detail::EquationalBuilder().run( phi );
}

namespace detail
{

using Dnf = std::set< std::set< std::string > >;

inline Dnf minimize( const Dnf& d )
{
    Dnf out;
    for ( const auto& t : d )
        if ( std::none_of( d.begin(), d.end(), [ & ]( const std::set< std::string >& u ) {
                 return u != t && std::includes( t.begin(), t.end(), u.begin(), u.end() );
             } ) )
            out.insert( t );
    return out;
}

inline Dnf dnf_and( const Dnf& a, const Dnf& b )
{
    Dnf out;
    for ( const auto& s : a )
        for ( const auto& t : b )
        {
            auto u = s;
            u.insert( t.begin(), t.end() );
            out.insert( u );
        }
    return minimize( out );
}

inline std::string dnf_text( const Dnf& d )
{
    std::vector< Formula > terms;
    for ( const auto& t : d )
    {
        std::vector< Formula > vs;
        for ( const auto& v : t )
            vs.push_back( var( v ) );
        terms.push_back( vs.size() == 1 ? vs.front() : conj( vs ) );
    }
    return nabla::to_string( terms.size() == 1 ? terms.front() : disj( terms ) );
}

// One disjunctive clause: closed members plus nab-over-variables members.
struct Clause
{
    FormulaSet closed;
    std::set< std::set< std::string > > nablas;

    friend auto operator<=>( const Clause&, const Clause& ) = default;
};

class ConjunctiveBuilder
{
    static constexpr std::size_t clause_limit = 1 << 14;
    static constexpr std::size_t variable_limit = 4096;

    EquationSystem _input;
    NameSupply _names;
    std::vector< std::string > _order;
    std::map< std::string, Formula > _raw;
    std::map< std::string, Formula > _final;
    std::vector< FreshVariable > _fresh;
    std::map< Formula, std::string > _hoisted;
    std::map< Formula, std::string > _closed;
    std::map< Dnf, std::string > _covers;
    std::optional< std::string > _bottom;
    std::vector< std::string > _queue;

    std::string add( const std::string& role, const Formula& meaning, const Formula& raw )
    {
        if ( _order.size() >= variable_limit )
            throw TranslationFailure( "too many fresh variables while translating " + nabla::to_string( meaning ) );
        auto name = _names.fresh();
        _order.push_back( name );
        _raw.emplace( name, raw );
        _fresh.push_back( { name, role, meaning } );
        _queue.push_back( name );
        return name;
    }

    std::string bottom()
    {
        if ( !_bottom )
        {
            auto name = _names.fresh();
            _bottom = name;
            _order.push_back( name );
            auto body = conj( { nab( { var( name ) } ), nab( {} ) } );
            _raw.emplace( name, body );
            _fresh.push_back( { name, "empty fixpoint", ff() } );
            _queue.push_back( name );
        }
        return *_bottom;
    }

    // (g v nab{bottom}) and (g v nab{}) for a closed g.
    Formula gadget( const FormulaSet& g )
    {
        FormulaSet dead = g, live = g;
        dead.insert( nab( { var( bottom() ) } ) );
        live.insert( nab( {} ) );
        return conj( { disj( { dead.begin(), dead.end() } ), disj( { live.begin(), live.end() } ) } );
    }

    std::string closed_variable( const Formula& q )
    {
        if ( auto it = _closed.find( q ); it != _closed.end() )
            return it->second;
        auto body = gadget( { q } );
        auto name = add( "closed formula", q, body );
        _closed.emplace( q, name );
        return name;
    }

    std::string hoisted_variable( const Formula& delta )
    {
        if ( auto it = _hoisted.find( delta ); it != _hoisted.end() )
            return it->second;
        auto unfolded = replace_unguarded( delta, [ & ]( const std::string& x ) { return _input.equation( x ); } );
        auto name = _names.fresh();
        _hoisted.emplace( delta, name );
        _order.push_back( name );
        _fresh.push_back( { name, "nab argument", delta } );
        _queue.push_back( name );
        _raw.emplace( name, hoist( unfolded ) );
        return name;
    }

    // Every nab argument becomes a variable.
    Formula hoist( const Formula& f )
    {
        if ( f.is_closed() )
            return f;
        switch ( f.kind() )
        {
        case Kind::And:
        case Kind::Or:
        {
            std::vector< Formula > args;
            for ( const auto& a : f.args() )
                args.push_back( hoist( a ) );
            return rebuild( f, std::move( args ) );
        }
        case Kind::Nabla:
        {
            std::vector< Formula > args;
            for ( const auto& a : f.args() )
            {
                if ( a.is( Kind::Var ) )
                    args.push_back( a );
                else if ( a.is_closed() )
                    args.push_back( var( closed_variable( a ) ) );
                else
                    args.push_back( var( hoisted_variable( a ) ) );
            }
            return nab( std::move( args ) );
        }
        default: throw TranslationFailure( "unexpected subterm " + nabla::to_string( f ) );
        }
    }

    std::vector< Clause > cnf( const Formula& f )
    {
        if ( f.is_closed() && !f.is( Kind::And ) && !f.is( Kind::Or ) )
            return { Clause{ { f }, {} } };
        if ( f.is( Kind::Nabla ) )
        {
            std::set< std::string > ys;
            for ( const auto& a : f.args() )
                ys.insert( a.name() );
            return { Clause{ {}, { ys } } };
        }
        if ( f.is( Kind::And ) )
        {
            std::set< Clause > out;
            for ( const auto& a : f.args() )
                for ( auto& c : cnf( a ) )
                    out.insert( std::move( c ) );
            return { out.begin(), out.end() };
        }
        if ( f.is( Kind::Or ) )
        {
            std::set< Clause > acc{ Clause{} };
            for ( const auto& a : f.args() )
            {
                std::set< Clause > next;
                for ( const auto& c : acc )
                    for ( const auto& d : cnf( a ) )
                    {
                        auto e = c;
                        e.closed.insert( d.closed.begin(), d.closed.end() );
                        e.nablas.insert( d.nablas.begin(), d.nablas.end() );
                        next.insert( std::move( e ) );
                    }
                if ( next.size() > clause_limit )
                    throw TranslationFailure( "clause blow-up in " + nabla::to_string( f ) );
                acc = std::move( next );
            }
            return { acc.begin(), acc.end() };
        }
        throw TranslationFailure( "unexpected subterm " + nabla::to_string( f ) );
    }

    std::string cover_variable( const Dnf& d )
    {
        if ( d.size() == 1 && d.begin()->size() == 1 )
            return *d.begin()->begin();
        if ( auto it = _covers.find( d ); it != _covers.end() )
            return it->second;
        std::vector< Formula > terms;
        for ( const auto& t : d )
        {
            std::vector< Formula > parts;
            for ( const auto& v : t )
                parts.push_back( _raw.at( v ) );
            terms.push_back( conj( parts ) );
        }
        std::vector< Formula > meaning;
        for ( const auto& t : d )
        {
            std::vector< Formula > vs;
            for ( const auto& v : t )
                vs.push_back( var( v ) );
            meaning.push_back( conj( vs ) );
        }
        auto name = add( "cover " + dnf_text( d ), disj( meaning ), disj( terms ) );
        _covers.emplace( d, name );
        return name;
    }

    // nab Y1 v ... v nab Yn as one nab: with D = or_i and Y_i, the set
    // { y v D : y in some Y_i } has the same dual cover.
    Formula merge( const std::set< std::set< std::string > >& nablas )
    {
        Dnf d;
        for ( const auto& ys : nablas )
            d.insert( ys );
        d = minimize( d );
        std::set< std::string > all;
        for ( const auto& ys : nablas )
            all.insert( ys.begin(), ys.end() );
        std::vector< Formula > args;
        for ( const auto& y : all )
        {
            auto with = d;
            with.insert( { y } );
            args.push_back( var( cover_variable( minimize( with ) ) ) );
        }
        return nab( std::move( args ) );
    }

    Formula normalize( const Formula& body )
    {
        std::vector< Formula > clauses;
        for ( const auto& c : cnf( body ) )
        {
            auto members = c.closed;
            if ( c.nablas.empty() && !members.contains( nab( {} ) ) )
            {
                auto g = gadget( members );
                clauses.insert( clauses.end(), g.args().begin(), g.args().end() );
                continue;
            }
            if ( c.nablas.size() == 1 )
            {
                std::vector< Formula > ys;
                for ( const auto& y : *c.nablas.begin() )
                    ys.push_back( var( y ) );
                members.insert( nab( ys ) );
            }
            else
                members.insert( merge( c.nablas ) );
            clauses.push_back( members.size() == 1 ? *members.begin() : disj( { members.begin(), members.end() } ) );
        }
        return clauses.size() == 1 ? clauses.front() : conj( clauses );
    }

public:
    explicit ConjunctiveBuilder( EquationSystem input ) : _input{ std::move( input ) }
    {
        std::set< std::string > taken( _input.vars().begin(), _input.vars().end() );
        for ( const auto& p : props_of( _input ) )
            taken.insert( p );
        _names = NameSupply( taken );
    }

    std::pair< EquationSystem, std::vector< FreshVariable > > run()
    {
        for ( const auto& x : _input.vars() )
        {
            _order.push_back( x );
            _queue.push_back( x );
        }
        for ( const auto& x : _input.vars() )
            _raw.emplace( x, hoist( _input.equation( x ) ) );
        for ( std::size_t i = 0; i < _queue.size(); ++i )
        {
            auto x = _queue[ i ];
            _final.insert_or_assign( x, normalize( _raw.at( x ) ) );
        }
        std::vector< std::pair< std::string, Formula > > eqs;
        for ( const auto& x : _order )
            eqs.emplace_back( x, _final.at( x ) );
        return { EquationSystem( eqs ), _fresh };
    }
};

} // namespace detail

// An equivalent formula over a conjunctive system. The result is checked
// against the input on the oracle frames; a mismatch raises TranslationFailure.
inline std::pair< EquationalFormula, TranslationReport > to_conjunctive( const EquationalFormula& ef, const OracleOptions& oracle = {} )
{
    std::optional< EquationalFormula > out;
    std::vector< FreshVariable > fresh;
    if ( is_conjunctive( ef.system() ) )
        out = ef;
    else
    {
        auto [ sys, vars ] = detail::ConjunctiveBuilder( ef.system() ).run();
        out = EquationalFormula( std::move( sys ), ef.init() );
        fresh = std::move( vars );
    }
    if ( !is_conjunctive( out->system() ) )
        throw TranslationFailure( "output is not conjunctive" );
    TranslationReport report{ ef, *out, std::move( fresh ), check_equivalence( ef, *out, oracle ) };
    if ( !report.oracle.equivalent() )
        throw TranslationFailure( std::to_string( report.oracle.mismatches ) + " frames disagree, first:\n" +
                                  *report.oracle.first_mismatch );
    return { *out, std::move( report ) };
}

inline std::string to_string( const TranslationReport& r )
{
    std::string out = "fresh variables: " + std::to_string( r.fresh.size() ) + "\n";
    for ( const auto& v : r.fresh )
        out += "  " + v.name + "  " + v.role + ( v.role.starts_with( "cover" ) ? "" : "  " + to_string( v.meaning ) ) + "\n";
    out += "oracle: " + std::to_string( r.oracle.frames_checked ) + " frames, " + std::to_string( r.oracle.mismatches ) +
           " mismatches\n";
    std::size_t higher = 0, lower = 0;
    for ( auto [ a, b ] : r.oracle.closure_ordinals )
    {
        higher += b > a;
        lower += b < a;
    }
    out += "closure ordinal per frame: output higher on " + std::to_string( higher ) + ", lower on " + std::to_string( lower ) + "\n";
    return out;
}

} // namespace nabla
