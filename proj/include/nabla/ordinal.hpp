#pragma once

#include "error.hpp"

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nabla
{

// One Cantor normal form summand: omega^exponent . coefficient.
struct Term
{
    std::uint32_t exponent = 0;
    std::uint64_t coefficient = 1;

    friend bool operator==( const Term&, const Term& ) = default;
};

enum class OrdinalKind
{
    Zero,
    Successor,
    Limit
};

// Ordinals below omega^omega in Cantor normal form. The term sequence is kept
// canonical (exponents strictly decreasing, coefficients positive), so
// structural equality is ordinal equality.
class Ordinal
{
    std::vector< Term > _terms;

public:
    Ordinal() = default;

    static Ordinal natural( std::uint64_t n )
    {
        Ordinal o;
        if ( n > 0 )
            o._terms.push_back( { 0, n } );
        return o;
    }

    static Ordinal omega_power( std::uint32_t exponent, std::uint64_t coefficient = 1 )
    {
        Ordinal o;
        if ( coefficient > 0 )
            o._terms.push_back( { exponent, coefficient } );
        return o;
    }

    static Ordinal omega() { return omega_power( 1 ); }

    // omega . k
    static Ordinal omega_times( std::uint64_t k ) { return omega_power( 1, k ); }

    // Builds from an arbitrary term list by ordinal summation left to right, so
    // absorbed terms disappear and the result is canonical.
    static Ordinal from_terms( const std::vector< Term >& terms );

    [[nodiscard]] const std::vector< Term >& terms() const { return _terms; }
    [[nodiscard]] bool is_zero() const { return _terms.empty(); }
    [[nodiscard]] bool is_finite() const { return _terms.empty() || _terms.front().exponent == 0; }

    [[nodiscard]] std::optional< std::uint64_t > as_natural() const
    {
        if ( is_zero() )
            return 0;
        if ( !is_finite() )
            return std::nullopt;
        return _terms.front().coefficient;
    }

    // Exponent of the last CNF term, i.e. the eta with a = pred(a) + omega^eta.
    [[nodiscard]] std::uint32_t last_exponent() const
    {
        if ( is_zero() )
            throw ZeroHasNoPred( "zero has no last term" );
        return _terms.back().exponent;
    }

    friend bool operator==( const Ordinal&, const Ordinal& ) = default;

    friend std::strong_ordering operator<=>( const Ordinal& a, const Ordinal& b )
    {
        const auto n = std::min( a._terms.size(), b._terms.size() );
        for ( std::size_t i = 0; i < n; ++i )
        {
            const auto& x = a._terms[ i ];
            const auto& y = b._terms[ i ];
            if ( x.exponent != y.exponent )
                return x.exponent <=> y.exponent;
            if ( x.coefficient != y.coefficient )
                return x.coefficient <=> y.coefficient;
        }
        return a._terms.size() <=> b._terms.size();
    }

    friend Ordinal operator+( const Ordinal& a, const Ordinal& b )
    {
        if ( b.is_zero() )
            return a;
        const auto lead = b._terms.front().exponent;
        Ordinal out;
        for ( const auto& t : a._terms )
        {
            if ( t.exponent > lead )
                out._terms.push_back( t );
            else if ( t.exponent == lead )
            {
                auto merged = b._terms.front();
                if ( __builtin_add_overflow( t.coefficient, merged.coefficient, &merged.coefficient ) )
                    throw std::overflow_error( "ordinal coefficient overflow" );
                out._terms.push_back( merged );
                out._terms.insert( out._terms.end(), b._terms.begin() + 1, b._terms.end() );
                return out;
            }
            else
                break;
        }
        out._terms.insert( out._terms.end(), b._terms.begin(), b._terms.end() );
        return out;
    }

    Ordinal& operator+=( const Ordinal& b ) { return *this = *this + b; }

    friend Ordinal pred( const Ordinal& a );
};

inline Ordinal Ordinal::from_terms( const std::vector< Term >& terms )
{
    Ordinal out;
    for ( const auto& t : terms )
        out += omega_power( t.exponent, t.coefficient );
    return out;
}

inline std::strong_ordering compare( const Ordinal& a, const Ordinal& b ) { return a <=> b; }

inline Ordinal add( const Ordinal& a, const Ordinal& b ) { return a + b; }

// The least ordinal b < a with a = b + omega^eta: the CNF of a with its last
// term deleted (one copy of it, when the coefficient exceeds one).
inline Ordinal pred( const Ordinal& a )
{
    if ( a.is_zero() )
        throw ZeroHasNoPred( "pred is undefined on 0" );
    Ordinal out = a;
    auto& last = out._terms.back();
    if ( last.coefficient > 1 )
        --last.coefficient;
    else
        out._terms.pop_back();
    return out;
}

inline OrdinalKind classify( const Ordinal& a )
{
    if ( a.is_zero() )
        return OrdinalKind::Zero;
    return a.last_exponent() == 0 ? OrdinalKind::Successor : OrdinalKind::Limit;
}

inline bool is_limit( const Ordinal& a ) { return classify( a ) == OrdinalKind::Limit; }

inline Ordinal successor( const Ordinal& a ) { return a + Ordinal::natural( 1 ); }

// b with b + 1 = a, if a is a successor.
inline std::optional< Ordinal > predecessor( const Ordinal& a )
{
    if ( classify( a ) != OrdinalKind::Successor )
        return std::nullopt;
    return pred( a );
}

inline std::string to_string( const Ordinal& a )
{
    if ( a.is_zero() )
        return "0";
    std::string out;
    for ( const auto& t : a.terms() )
    {
        if ( !out.empty() )
            out += '+';
        if ( t.exponent == 0 )
        {
            out += std::to_string( t.coefficient );
            continue;
        }
        out += 'w';
        if ( t.exponent != 1 )
            out += "^" + std::to_string( t.exponent );
        if ( t.coefficient != 1 )
            out += "." + std::to_string( t.coefficient );
    }
    return out;
}

inline std::ostream& operator<<( std::ostream& os, const Ordinal& a ) { return os << to_string( a ); }

inline std::string to_string( OrdinalKind k )
{
    switch ( k )
    {
    case OrdinalKind::Zero: return "zero";
    case OrdinalKind::Successor: return "successor";
    case OrdinalKind::Limit: return "limit";
    }
    return "?";
}

// Grammar: term ('+' term)*, term = natural | 'w' ['^' natural] ['.' natural].
// Non-canonical sums such as "3+w" are accepted and normalised.
inline Ordinal parse_ordinal( std::string_view text )
{
    std::size_t pos = 0;
    auto fail = [ & ]( const std::string& what ) -> void {
        throw SyntaxError( "ordinal: " + what + " in '" + std::string( text ) + "'", 1, pos + 1 );
    };
    auto skip_ws = [ & ] {
        while ( pos < text.size() && std::isspace( static_cast< unsigned char >( text[ pos ] ) ) )
            ++pos;
    };
    auto number = [ & ]() -> std::uint64_t {
        skip_ws();
        if ( pos >= text.size() || !std::isdigit( static_cast< unsigned char >( text[ pos ] ) ) )
            fail( "expected a natural number" );
        std::uint64_t v = 0;
        while ( pos < text.size() && std::isdigit( static_cast< unsigned char >( text[ pos ] ) ) )
        {
            if ( __builtin_mul_overflow( v, 10u, &v ) || __builtin_add_overflow( v, text[ pos ] - '0', &v ) )
                fail( "number too large" );
            ++pos;
        }
        return v;
    };

    Ordinal out;
    for ( ;; )
    {
        skip_ws();
        if ( pos < text.size() && text[ pos ] == 'w' )
        {
            ++pos;
            std::uint64_t exponent = 1;
            std::uint64_t coefficient = 1;
            skip_ws();
            if ( pos < text.size() && text[ pos ] == '^' )
            {
                ++pos;
                exponent = number();
                if ( exponent > UINT32_MAX )
                    fail( "exponent too large" );
            }
            skip_ws();
            if ( pos < text.size() && text[ pos ] == '.' )
            {
                ++pos;
                coefficient = number();
                if ( coefficient == 0 )
                    fail( "zero coefficient" );
            }
            out += Ordinal::omega_power( static_cast< std::uint32_t >( exponent ), coefficient );
        }
        else
            out += Ordinal::natural( number() );
        skip_ws();
        if ( pos == text.size() )
            break;
        if ( text[ pos ] != '+' )
            fail( "unexpected character" );
        ++pos;
    }
    return out;
}

} // namespace nabla
