#pragma once

#include "error.hpp"

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nabla
{

// The declaration order doubles as the canonical order between kinds when
// formulas are sorted into sets, so "ff" prints before "p" inside braces.
enum class Kind : std::uint8_t
{
    And,
    Or,
    Nabla,
    Mu,
    Nu,
    Box, // surface sugar, only present when a parse keeps it
    Dia, // surface sugar
    Prop,
    NegProp,
    Var,
};

// Immutable, shared formula AST. Arguments of and/or/nab are genuine sets:
// sorted by the total order below and duplicate-free, so structural equality
// is set equality.
class Formula
{
    struct Node
    {
        Kind kind;
        std::string name;
        std::vector< Formula > args;
        std::vector< std::string > free_vars;
        std::size_t hash = 0;
        std::size_t node_count = 1;
        bool has_sugar = false;
    };

    std::shared_ptr< const Node > _node;

    explicit Formula( std::shared_ptr< const Node > node ) : _node{ std::move( node ) } {}

    static Formula make( Kind kind, std::string name, std::vector< Formula > args );

    friend Formula prop( std::string name );
    friend Formula neg_prop( std::string name );
    friend Formula var( std::string name );
    friend Formula conj( std::vector< Formula > args );
    friend Formula disj( std::vector< Formula > args );
    friend Formula nab( std::vector< Formula > args );
    friend Formula mu( std::string x, Formula body );
    friend Formula nu( std::string x, Formula body );
    friend Formula sugar_box( Formula body );
    friend Formula sugar_dia( Formula body );

public:
    [[nodiscard]] Kind kind() const { return _node->kind; }
    // Proposition, variable or binder name; empty for connectives.
    [[nodiscard]] const std::string& name() const { return _node->name; }
    [[nodiscard]] std::span< const Formula > args() const { return _node->args; }
    // Body of mu/nu/box/dia.
    [[nodiscard]] const Formula& body() const { return _node->args.front(); }
    [[nodiscard]] const std::vector< std::string >& free_vars() const { return _node->free_vars; }
    [[nodiscard]] bool is_closed() const { return _node->free_vars.empty(); }
    [[nodiscard]] bool has_free( std::string_view x ) const
    {
        return std::binary_search( _node->free_vars.begin(), _node->free_vars.end(), x );
    }
    [[nodiscard]] bool has_sugar() const { return _node->has_sugar; }
    [[nodiscard]] std::size_t hash() const { return _node->hash; }
    [[nodiscard]] std::size_t node_count() const { return _node->node_count; }

    [[nodiscard]] bool is( Kind k ) const { return kind() == k; }
    [[nodiscard]] bool is_literal() const { return is( Kind::Prop ) || is( Kind::NegProp ); }
    [[nodiscard]] bool is_quantifier() const { return is( Kind::Mu ) || is( Kind::Nu ); }
    [[nodiscard]] bool is_set_connective() const
    {
        return is( Kind::And ) || is( Kind::Or ) || is( Kind::Nabla );
    }

    friend std::strong_ordering operator<=>( const Formula& a, const Formula& b )
    {
        if ( a._node == b._node )
            return std::strong_ordering::equal;
        if ( auto c = a.kind() <=> b.kind(); c != 0 )
            return c;
        if ( auto c = a.name() <=> b.name(); c != 0 )
            return c;
        return std::lexicographical_compare_three_way( a._node->args.begin(), a._node->args.end(),
                                                       b._node->args.begin(), b._node->args.end() );
    }

    friend bool operator==( const Formula& a, const Formula& b )
    {
        if ( a._node == b._node )
            return true;
        return a.hash() == b.hash() && ( a <=> b ) == 0;
    }
};

inline Formula Formula::make( Kind kind, std::string name, std::vector< Formula > args )
{
    auto node = std::make_shared< Node >();
    node->kind = kind;
    node->name = std::move( name );
    if ( kind == Kind::And || kind == Kind::Or || kind == Kind::Nabla )
    {
        std::sort( args.begin(), args.end() );
        args.erase( std::unique( args.begin(), args.end() ), args.end() );
    }
    node->args = std::move( args );

    std::set< std::string > free;
    if ( kind == Kind::Var )
        free.insert( node->name );
    for ( const auto& a : node->args )
    {
        free.insert( a.free_vars().begin(), a.free_vars().end() );
        node->node_count += a.node_count();
        node->has_sugar = node->has_sugar || a.has_sugar();
    }
    if ( kind == Kind::Mu || kind == Kind::Nu )
        free.erase( node->name );
    if ( kind == Kind::Box || kind == Kind::Dia )
        node->has_sugar = true;
    node->free_vars.assign( free.begin(), free.end() );

    std::size_t h = std::hash< std::uint8_t >{}( static_cast< std::uint8_t >( kind ) ) * 0x9e3779b97f4a7c15ULL;
    h ^= std::hash< std::string >{}( node->name ) + 0x9e3779b9 + ( h << 6 ) + ( h >> 2 );
    for ( const auto& a : node->args )
        h ^= a.hash() + 0x9e3779b9 + ( h << 6 ) + ( h >> 2 );
    node->hash = h;
    return Formula( std::move( node ) );
}

inline Formula prop( std::string name ) { return Formula::make( Kind::Prop, std::move( name ), {} ); }
inline Formula neg_prop( std::string name ) { return Formula::make( Kind::NegProp, std::move( name ), {} ); }
inline Formula var( std::string name ) { return Formula::make( Kind::Var, std::move( name ), {} ); }
inline Formula conj( std::vector< Formula > args ) { return Formula::make( Kind::And, {}, std::move( args ) ); }
inline Formula disj( std::vector< Formula > args ) { return Formula::make( Kind::Or, {}, std::move( args ) ); }
inline Formula nab( std::vector< Formula > args ) { return Formula::make( Kind::Nabla, {}, std::move( args ) ); }
inline Formula mu( std::string x, Formula body ) { return Formula::make( Kind::Mu, std::move( x ), { std::move( body ) } ); }
inline Formula nu( std::string x, Formula body ) { return Formula::make( Kind::Nu, std::move( x ), { std::move( body ) } ); }
inline Formula sugar_box( Formula body ) { return Formula::make( Kind::Box, {}, { std::move( body ) } ); }
inline Formula sugar_dia( Formula body ) { return Formula::make( Kind::Dia, {}, { std::move( body ) } ); }

inline Formula tt() { return conj( {} ); }
inline Formula ff() { return disj( {} ); }

// box phi := nab{phi, ff}
inline Formula box( Formula body ) { return nab( { std::move( body ), ff() } ); }
// dia phi := and{nab{phi}, nab{}}
inline Formula dia( Formula body ) { return conj( { nab( { std::move( body ) } ), nab( {} ) } ); }

inline bool is_tt( const Formula& f ) { return f.is( Kind::And ) && f.args().empty(); }
inline bool is_ff( const Formula& f ) { return f.is( Kind::Or ) && f.args().empty(); }

struct FormulaHash
{
    std::size_t operator()( const Formula& f ) const noexcept { return f.hash(); }
};

using FormulaSet = std::set< Formula >;

// Rebuilds a node of the same kind with new arguments.
inline Formula rebuild( const Formula& f, std::vector< Formula > args )
{
    switch ( f.kind() )
    {
    case Kind::And: return conj( std::move( args ) );
    case Kind::Or: return disj( std::move( args ) );
    case Kind::Nabla: return nab( std::move( args ) );
    case Kind::Mu: return mu( f.name(), std::move( args.front() ) );
    case Kind::Nu: return nu( f.name(), std::move( args.front() ) );
    case Kind::Box: return sugar_box( std::move( args.front() ) );
    case Kind::Dia: return sugar_dia( std::move( args.front() ) );
    default: return f;
    }
}

// Replaces sugar nodes by their nabla definitions.
inline Formula desugar( const Formula& f )
{
    if ( !f.has_sugar() )
        return f;
    std::vector< Formula > args;
    for ( const auto& a : f.args() )
        args.push_back( desugar( a ) );
    if ( f.is( Kind::Box ) )
        return box( std::move( args.front() ) );
    if ( f.is( Kind::Dia ) )
        return dia( std::move( args.front() ) );
    return rebuild( f, std::move( args ) );
}

namespace detail
{

inline std::string fresh_binder( const std::string& base, const Formula& avoid_a, const Formula& avoid_b )
{
    for ( std::size_t i = 0;; ++i )
    {
        auto candidate = base + "_" + std::to_string( i );
        if ( !avoid_a.has_free( candidate ) && !avoid_b.has_free( candidate ) )
            return candidate;
    }
}

} // namespace detail

// f[replacement / x], renaming binders that would capture free variables of
// the replacement.
inline Formula substitute( const Formula& f, const std::string& x, const Formula& replacement )
{
    if ( !f.has_free( x ) )
        return f;
    if ( f.is( Kind::Var ) )
        return replacement;
    if ( f.is_quantifier() )
    {
        if ( f.name() == x )
            return f;
        if ( replacement.has_free( f.name() ) )
        {
            auto fresh = detail::fresh_binder( f.name(), f.body(), replacement );
            auto renamed = substitute( f.body(), f.name(), var( fresh ) );
            auto body = substitute( renamed, x, replacement );
            return f.is( Kind::Mu ) ? mu( fresh, body ) : nu( fresh, body );
        }
    }
    std::vector< Formula > args;
    for ( const auto& a : f.args() )
        args.push_back( substitute( a, x, replacement ) );
    return rebuild( f, std::move( args ) );
}

// Simultaneous substitution; replacement formulas are not rescanned.
inline Formula substitute_all( const Formula& f, const std::function< std::optional< Formula >( const std::string& ) >& lookup )
{
    if ( f.is_closed() )
        return f;
    if ( f.is( Kind::Var ) )
        return lookup( f.name() ).value_or( f );
    if ( f.is_quantifier() )
    {
        // Bound occurrences stay; only free variables of the body are replaced.
        auto bound = f.name();
        auto inner = [ & ]( const std::string& v ) -> std::optional< Formula > {
            if ( v == bound )
                return std::nullopt;
            return lookup( v );
        };
        return rebuild( f, { substitute_all( f.body(), inner ) } );
    }
    std::vector< Formula > args;
    for ( const auto& a : f.args() )
        args.push_back( substitute_all( a, lookup ) );
    return rebuild( f, std::move( args ) );
}

namespace detail
{

inline void print( std::string& out, const Formula& f )
{
    auto set = [ & ]( const char* head ) {
        out += head;
        out += '{';
        bool first = true;
        for ( const auto& a : f.args() )
        {
            if ( !first )
                out += ", ";
            first = false;
            print( out, a );
        }
        out += '}';
    };
    switch ( f.kind() )
    {
    case Kind::And:
        if ( f.args().empty() )
            out += "tt";
        else
            set( "and" );
        break;
    case Kind::Or:
        if ( f.args().empty() )
            out += "ff";
        else
            set( "or" );
        break;
    case Kind::Nabla: set( "nab" ); break;
    case Kind::Mu:
    case Kind::Nu:
        out += f.is( Kind::Mu ) ? "mu " : "nu ";
        out += f.name();
        out += ". ";
        print( out, f.body() );
        break;
    case Kind::Box:
    case Kind::Dia:
        out += f.is( Kind::Box ) ? "box " : "dia ";
        print( out, f.body() );
        break;
    case Kind::Prop:
    case Kind::Var: out += f.name(); break;
    case Kind::NegProp:
        out += '!';
        out += f.name();
        break;
    }
}

} // namespace detail

inline std::string to_string( const Formula& f )
{
    std::string out;
    detail::print( out, f );
    return out;
}

inline std::ostream& operator<<( std::ostream& os, const Formula& f ) { return os << to_string( f ); }

inline std::string to_string( const FormulaSet& fs )
{
    std::string out = "{";
    bool first = true;
    for ( const auto& f : fs )
    {
        if ( !first )
            out += ", ";
        first = false;
        out += to_string( f );
    }
    return out + "}";
}

struct ParseOptions
{
    // Keep `box` / `dia` as sugar nodes instead of expanding them.
    bool keep_sugar = false;
};

namespace detail
{

inline bool is_keyword( std::string_view w )
{
    static constexpr std::string_view keywords[] = { "tt", "ff", "and", "or", "nab", "mu", "nu", "box", "dia" };
    return std::find( std::begin( keywords ), std::end( keywords ), w ) != std::end( keywords );
}

inline bool is_ident_start( char c ) { return std::isalpha( static_cast< unsigned char >( c ) ) || c == '_'; }
inline bool is_ident_char( char c ) { return std::isalnum( static_cast< unsigned char >( c ) ) || c == '_' || c == '\''; }

class FormulaParser
{
    std::string_view _text;
    std::size_t _pos = 0;
    std::size_t _line;
    std::size_t _column;
    const std::set< std::string >& _vars;
    std::vector< std::string > _bound;
    ParseOptions _options;

public:
    FormulaParser( std::string_view text, const std::set< std::string >& vars, ParseOptions options,
                   std::size_t line = 1, std::size_t column = 1 )
            : _text{ text }, _line{ line }, _column{ column }, _vars{ vars }, _options{ options }
    {
    }

    Formula parse_all()
    {
        auto f = formula();
        skip_ws();
        if ( _pos < _text.size() )
            fail( "unexpected trailing input '" + std::string( _text.substr( _pos, 10 ) ) + "'" );
        return f;
    }

private:
    [[noreturn]] void fail( const std::string& what ) const { throw SyntaxError( what, _line, _column ); }

    void advance()
    {
        if ( _text[ _pos ] == '\n' )
        {
            ++_line;
            _column = 1;
        }
        else
            ++_column;
        ++_pos;
    }

    void skip_ws()
    {
        while ( _pos < _text.size() && std::isspace( static_cast< unsigned char >( _text[ _pos ] ) ) )
            advance();
    }

    bool peek( char c )
    {
        skip_ws();
        return _pos < _text.size() && _text[ _pos ] == c;
    }

    void expect( char c )
    {
        if ( !peek( c ) )
            fail( std::string( "expected '" ) + c + "'" );
        advance();
    }

    std::string identifier()
    {
        skip_ws();
        if ( _pos >= _text.size() || !is_ident_start( _text[ _pos ] ) )
            fail( "expected an identifier" );
        auto start = _pos;
        while ( _pos < _text.size() && is_ident_char( _text[ _pos ] ) )
            advance();
        return std::string( _text.substr( start, _pos - start ) );
    }

    bool is_variable( const std::string& name ) const
    {
        return std::find( _bound.begin(), _bound.end(), name ) != _bound.end() || _vars.contains( name );
    }

    std::vector< Formula > formula_set()
    {
        expect( '{' );
        std::vector< Formula > out;
        if ( peek( '}' ) )
        {
            advance();
            return out;
        }
        for ( ;; )
        {
            out.push_back( formula() );
            if ( peek( ',' ) )
            {
                advance();
                continue;
            }
            expect( '}' );
            return out;
        }
    }

    Formula formula()
    {
        skip_ws();
        if ( _pos >= _text.size() )
            fail( "unexpected end of input" );
        if ( peek( '(' ) )
        {
            advance();
            auto f = formula();
            expect( ')' );
            return f;
        }
        if ( peek( '!' ) )
        {
            advance();
            auto line = _line, column = _column;
            auto name = identifier();
            if ( is_keyword( name ) )
                fail( "negation applies to propositions only" );
            if ( is_variable( name ) )
                throw NegatedVariable( std::to_string( line ) + ":" + std::to_string( column )
                                       + ": negated variable '" + name + "'" );
            return neg_prop( name );
        }
        auto word = identifier();
        if ( word == "tt" )
            return tt();
        if ( word == "ff" )
            return ff();
        if ( word == "and" )
            return conj( formula_set() );
        if ( word == "or" )
            return disj( formula_set() );
        if ( word == "nab" )
            return nab( formula_set() );
        if ( word == "mu" || word == "nu" )
        {
            auto x = identifier();
            if ( is_keyword( x ) )
                fail( "keyword '" + x + "' cannot be bound" );
            expect( '.' );
            _bound.push_back( x );
            auto body = formula();
            _bound.pop_back();
            return word == "mu" ? mu( x, body ) : nu( x, body );
        }
        if ( word == "box" || word == "dia" )
        {
            auto body = formula();
            if ( _options.keep_sugar )
                return word == "box" ? sugar_box( body ) : sugar_dia( body );
            return word == "box" ? box( body ) : dia( body );
        }
        return is_variable( word ) ? var( word ) : prop( word );
    }
};

} // namespace detail

// Identifiers bound by an enclosing mu/nu or listed in `vars` parse as
// variables; every other identifier is a proposition.
inline Formula parse_formula( std::string_view text, const std::set< std::string >& vars = {},
                              ParseOptions options = {} )
{
    return detail::FormulaParser( text, vars, options ).parse_all();
}

// Propositions mentioned anywhere in f (positively or negatively).
inline void collect_props( const Formula& f, std::set< std::string >& out )
{
    if ( f.is_literal() )
        out.insert( f.name() );
    for ( const auto& a : f.args() )
        collect_props( a, out );
}

} // namespace nabla

template <>
struct std::hash< nabla::Formula >
{
    std::size_t operator()( const nabla::Formula& f ) const noexcept { return f.hash(); }
};
