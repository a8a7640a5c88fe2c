#pragma once

#include "error.hpp"
#include "formula.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nabla
{

namespace detail
{

// Free variables with an occurrence outside every nab.
inline void unguarded_vars( const Formula& f, std::set< std::string >& out )
{
    switch ( f.kind() )
    {
    case Kind::Var: out.insert( f.name() ); break;
    case Kind::And:
    case Kind::Or:
        for ( const auto& a : f.args() )
            unguarded_vars( a, out );
        break;
    case Kind::Mu:
    case Kind::Nu:
        // Binders shadow; what remains free in the body is unguarded unless a
        // nab intervenes.
        {
            std::set< std::string > inner;
            unguarded_vars( f.body(), inner );
            inner.erase( f.name() );
            out.insert( inner.begin(), inner.end() );
        }
        break;
    default: break;
    }
}

} // namespace detail

inline std::set< std::string > unguarded_vars( const Formula& f )
{
    std::set< std::string > out;
    detail::unguarded_vars( f, out );
    return out;
}

// (X, E): variables in declaration order with one quantifier-free, guarded
// defining formula each. The declaration order is the fixed enumeration used
// by signatures.
class EquationSystem
{
    std::vector< std::string > _vars;
    std::map< std::string, Formula > _eqs;

    void validate( const std::string& x, const Formula& body ) const
    {
        auto where = [ & ] { return "equation '" + x + "': "; };
        for ( const auto& v : body.free_vars() )
            if ( !_eqs.contains( v ) )
                throw UnboundVariable( where() + "variable '" + v + "' has no equation" );
        if ( auto bad = unguarded_vars( body ); !bad.empty() )
            throw UnguardedVariable( where() + "variable '" + *bad.begin() + "' is not in the scope of a nab" );
        check_shape( x, body );
    }

    void check_shape( const std::string& x, const Formula& f ) const
    {
        if ( f.is_quantifier() )
        {
            if ( !f.is_closed() )
                throw NotSigmaFragment( "equation '" + x + "': quantified subformula '" + to_string( f )
                                        + "' has free variables" );
            return;
        }
        if ( f.is_literal() && _eqs.contains( f.name() ) )
        {
            if ( f.is( Kind::NegProp ) )
                throw NegatedVariable( "equation '" + x + "': negated variable '" + f.name() + "'" );
            throw InvalidParameter( "equation '" + x + "': proposition '" + f.name() + "' clashes with a variable" );
        }
        for ( const auto& a : f.args() )
            check_shape( x, a );
    }

public:
    EquationSystem() = default;

    explicit EquationSystem( std::vector< std::pair< std::string, Formula > > equations )
    {
        for ( auto& [ x, body ] : equations )
        {
            if ( _eqs.contains( x ) )
                throw InvalidParameter( "duplicate equation for '" + x + "'" );
            _vars.push_back( x );
            _eqs.emplace( x, desugar( body ) );
        }
        for ( const auto& x : _vars )
            validate( x, _eqs.at( x ) );
    }

    [[nodiscard]] const std::vector< std::string >& vars() const { return _vars; }
    [[nodiscard]] std::size_t var_count() const { return _vars.size(); }
    [[nodiscard]] bool contains( const std::string& x ) const { return _eqs.contains( x ); }

    [[nodiscard]] const Formula& equation( const std::string& x ) const
    {
        auto it = _eqs.find( x );
        if ( it == _eqs.end() )
            throw UnboundVariable( "no equation for '" + x + "'" );
        return it->second;
    }

    [[nodiscard]] std::size_t index_of( const std::string& x ) const
    {
        auto it = std::find( _vars.begin(), _vars.end(), x );
        if ( it == _vars.end() )
            throw UnboundVariable( "no equation for '" + x + "'" );
        return static_cast< std::size_t >( it - _vars.begin() );
    }

    [[nodiscard]] std::set< std::string > var_set() const { return { _vars.begin(), _vars.end() }; }

    [[nodiscard]] std::vector< std::pair< std::string, Formula > > equations() const
    {
        std::vector< std::pair< std::string, Formula > > out;
        for ( const auto& x : _vars )
            out.emplace_back( x, _eqs.at( x ) );
        return out;
    }

    friend bool operator==( const EquationSystem&, const EquationSystem& ) = default;
};

// (X, x0, E).
class EquationalFormula
{
    EquationSystem _system;
    std::string _init;

public:
    EquationalFormula( EquationSystem system, std::string init ) : _system{ std::move( system ) }, _init{ std::move( init ) }
    {
        if ( !_system.contains( _init ) )
            throw UnboundVariable( "initial variable '" + _init + "' has no equation" );
    }

    [[nodiscard]] const EquationSystem& system() const { return _system; }
    [[nodiscard]] const std::string& init() const { return _init; }

    friend bool operator==( const EquationalFormula&, const EquationalFormula& ) = default;
};

// Fischer-Ladner closure: E(X), closed under members of and/or/nab argument
// sets and under one-step unfolding of (closed) mu/nu subformulas.
inline FormulaSet closure( const EquationSystem& sys )
{
    FormulaSet out;
    std::vector< Formula > work;
    auto push = [ & ]( const Formula& f ) {
        if ( out.insert( f ).second )
            work.push_back( f );
    };
    for ( const auto& x : sys.vars() )
        push( sys.equation( x ) );
    while ( !work.empty() )
    {
        auto f = work.back();
        work.pop_back();
        if ( f.is_set_connective() )
            for ( const auto& a : f.args() )
                push( a );
        else if ( f.is_quantifier() )
            push( substitute( f.body(), f.name(), f ) );
    }
    return out;
}

inline std::size_t size( const EquationSystem& sys ) { return closure( sys ).size(); }

namespace detail
{

inline void collect_conjuncts( const Formula& f, std::vector< Formula >& out )
{
    if ( f.is( Kind::And ) || ( f.is( Kind::Or ) && f.args().size() == 1 ) )
        for ( const auto& a : f.args() )
            collect_conjuncts( a, out );
    else
        out.push_back( f );
}

inline void collect_disjuncts( const Formula& f, std::vector< Formula >& out )
{
    if ( f.is( Kind::Or ) || ( f.is( Kind::And ) && f.args().size() == 1 ) )
        for ( const auto& a : f.args() )
            collect_disjuncts( a, out );
    else
        out.push_back( f );
}

inline bool is_variable_nabla( const Formula& f, const EquationSystem& sys )
{
    if ( !f.is( Kind::Nabla ) )
        return false;
    return std::all_of( f.args().begin(), f.args().end(),
                        [ & ]( const Formula& a ) { return a.is( Kind::Var ) && sys.contains( a.name() ); } );
}

// One clause: (or Gamma) v nab Y with Gamma closed, Y a set of variables.
inline bool is_conjunctive_clause( const Formula& clause, const EquationSystem& sys )
{
    std::vector< Formula > members;
    collect_disjuncts( clause, members );
    std::size_t modal = 0;
    bool empty_nabla = false;
    for ( const auto& m : members )
    {
        if ( m.is_closed() )
        {
            empty_nabla = empty_nabla || ( m.is( Kind::Nabla ) && m.args().empty() );
            continue;
        }
        if ( !is_variable_nabla( m, sys ) )
            return false;
        ++modal;
    }
    return modal == 1 || ( modal == 0 && empty_nabla );
}

} // namespace detail

// Each E(x) has the shape and_i ( (or Gamma_i) v nab Y_i ) after flattening
// nested and singleton and/or wrappers.
inline bool is_conjunctive( const Formula& body, const EquationSystem& sys )
{
    std::vector< Formula > clauses;
    detail::collect_conjuncts( body, clauses );
    return std::all_of( clauses.begin(), clauses.end(),
                        [ & ]( const Formula& c ) { return detail::is_conjunctive_clause( c, sys ); } );
}

inline bool is_conjunctive( const EquationSystem& sys )
{
    return std::all_of( sys.vars().begin(), sys.vars().end(),
                        [ & ]( const std::string& x ) { return is_conjunctive( sys.equation( x ), sys ); } );
}

// Formula parsed in the variable context of a system.
inline Formula parse_formula( std::string_view text, const EquationSystem& sys, ParseOptions options = {} )
{
    return parse_formula( text, sys.var_set(), options );
}

namespace detail
{

inline std::string_view trim( std::string_view s )
{
    while ( !s.empty() && std::isspace( static_cast< unsigned char >( s.front() ) ) )
        s.remove_prefix( 1 );
    while ( !s.empty() && std::isspace( static_cast< unsigned char >( s.back() ) ) )
        s.remove_suffix( 1 );
    return s;
}

inline std::string_view strip_comment( std::string_view line )
{
    if ( auto hash = line.find( '#' ); hash != std::string_view::npos )
        line = line.substr( 0, hash );
    return line;
}

inline bool is_identifier( std::string_view s )
{
    if ( s.empty() || !is_ident_start( s.front() ) )
        return false;
    return std::all_of( s.begin(), s.end(), is_ident_char ) && !is_keyword( s );
}

} // namespace detail

// `.mes` format: a `system` header, `init: <var>`, then one `var = formula`
// line per equation. `#` starts a comment.
inline EquationalFormula parse_system( std::string_view text )
{
    struct Line
    {
        std::size_t number;
        std::string_view content;
        std::size_t offset;
    };
    std::vector< Line > lines;
    std::size_t number = 0;
    std::size_t start = 0;
    while ( start <= text.size() )
    {
        auto end = text.find( '\n', start );
        if ( end == std::string_view::npos )
            end = text.size();
        ++number;
        auto raw = detail::strip_comment( text.substr( start, end - start ) );
        auto trimmed = detail::trim( raw );
        if ( !trimmed.empty() )
            lines.push_back( { number, trimmed, static_cast< std::size_t >( trimmed.data() - raw.data() ) } );
        start = end + 1;
    }

    if ( lines.empty() || lines.front().content != "system" )
        throw SyntaxError( "expected 'system' header", lines.empty() ? 1 : lines.front().number, 1 );

    std::string init;
    std::size_t init_line = 0;
    struct Pending
    {
        std::string var;
        std::string_view body;
        std::size_t line;
        std::size_t column;
    };
    std::vector< Pending > pending;
    std::set< std::string > vars;
    for ( std::size_t i = 1; i < lines.size(); ++i )
    {
        const auto& l = lines[ i ];
        if ( l.content.starts_with( "init:" ) )
        {
            if ( !init.empty() )
                throw SyntaxError( "duplicate 'init:' line", l.number, 1 );
            init = std::string( detail::trim( l.content.substr( 5 ) ) );
            init_line = l.number;
            if ( !detail::is_identifier( init ) )
                throw SyntaxError( "expected a variable after 'init:'", l.number, 6 );
            continue;
        }
        auto eq = l.content.find( '=' );
        if ( eq == std::string_view::npos )
            throw SyntaxError( "expected 'var = formula'", l.number, l.offset + 1 );
        auto name = std::string( detail::trim( l.content.substr( 0, eq ) ) );
        if ( !detail::is_identifier( name ) )
            throw SyntaxError( "invalid variable name '" + name + "'", l.number, l.offset + 1 );
        if ( !vars.insert( name ).second )
            throw SyntaxError( "duplicate equation for '" + name + "'", l.number, l.offset + 1 );
        pending.push_back( { name, l.content.substr( eq + 1 ), l.number, l.offset + eq + 2 } );
    }
    if ( init.empty() )
        throw SyntaxError( "missing 'init:' line", lines.front().number, 1 );
    if ( !vars.contains( init ) )
        throw UnboundVariable( std::to_string( init_line ) + ":6: initial variable '" + init + "' has no equation" );

    std::vector< std::pair< std::string, Formula > > equations;
    for ( const auto& p : pending )
        equations.emplace_back( p.var, detail::FormulaParser( p.body, vars, {}, p.line, p.column ).parse_all() );
    return EquationalFormula( EquationSystem( std::move( equations ) ), init );
}

inline std::string to_string( const EquationalFormula& ef )
{
    std::ostringstream os;
    os << "system\n"
       << "init: " << ef.init() << "\n";
    for ( const auto& [ x, body ] : ef.system().equations() )
        os << x << " = " << to_string( body ) << "\n";
    return os.str();
}

} // namespace nabla
