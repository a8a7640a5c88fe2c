#pragma once

// Shared generators for the test programs.

#include <nabla/system.hpp>

#include <random>
#include <string>
#include <vector>

namespace nabla::testing
{

struct SystemGenerator
{
    std::mt19937_64 rng;
    std::vector< std::string > props{ "p", "q" };

    std::size_t pick( std::size_t n ) { return static_cast< std::size_t >( rng() % n ); }

    Formula literal()
    {
        const auto& p = props[ pick( props.size() ) ];
        return pick( 3 ) == 0 ? neg_prop( p ) : prop( p );
    }

    // Quantifier-free body over `vars`; variables only occur below a nab.
    Formula body( const std::vector< std::string >& vars, int depth, bool guarded )
    {
        if ( depth == 0 )
        {
            if ( guarded && !vars.empty() && pick( 3 ) != 0 )
                return var( vars[ pick( vars.size() ) ] );
            return literal();
        }
        switch ( pick( 6 ) )
        {
        case 0: return literal();
        case 1:
        case 2:
        {
            std::vector< Formula > args;
            auto n = 1 + pick( 2 );
            for ( std::size_t i = 0; i < n; ++i )
                args.push_back( body( vars, depth - 1, guarded ) );
            return pick( 2 ) ? conj( args ) : disj( args );
        }
        default:
        {
            std::vector< Formula > args;
            auto n = pick( 3 );
            for ( std::size_t i = 0; i < n; ++i )
                args.push_back( body( vars, depth - 1, true ) );
            return nab( args );
        }
        }
    }

    EquationSystem system( std::size_t nvars, int depth = 3 )
    {
        std::vector< std::string > vars;
        for ( std::size_t i = 0; i < nvars; ++i )
            vars.push_back( std::string( 1, static_cast< char >( 'x' + i ) ) );
        std::vector< std::pair< std::string, Formula > > eqs;
        for ( const auto& x : vars )
            eqs.emplace_back( x, body( vars, depth, false ) );
        return EquationSystem( eqs );
    }
};

} // namespace nabla::testing
