#include "descent.hpp"

#include <nabla/pump.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace nabla;

namespace
{

Ordinal w( std::uint64_t k ) { return Ordinal::omega_times( k ); }

Frame path3() { return Frame( { "s0", "s1", "s2" }, { { "s0", "s1" }, { "s1", "s2" } } ); }

// Same entries in theta and phi at every state.
AnnotatedTree marked( const TreeFrame& tree, const std::vector< AnnSet >& sets )
{
    Annotation a( tree.size() );
    for ( StateId s = 0; s < sets.size(); ++s )
        a.at( s ) = sets[ s ];
    return { tree, a, a };
}

// Plain double loop over all ordered state pairs.
std::vector< RepetitionPair > brute_pairs( const AnnotatedTree& t )
{
    std::vector< RepetitionPair > out;
    for ( StateId s = 0; s < t.tree.size(); ++s )
        for ( StateId b = 0; b < t.tree.size(); ++b )
        {
            if ( !t.tree.is_proper_ancestor( s, b ) )
                continue;
            if ( stripped( t.theta.at( s ) ) != stripped( t.theta.at( b ) ) || stripped( t.phi.at( s ) ) != stripped( t.phi.at( b ) ) )
                continue;
            for ( const auto& hi : t.phi.at( s ) )
                for ( const auto& lo : t.phi.at( b ) )
                    if ( hi.formula.is( Kind::Nabla ) && hi.formula == lo.formula && is_limit( hi.ordinal ) &&
                         is_limit( lo.ordinal ) && lo.ordinal < hi.ordinal )
                        out.push_back( { s, b, args_of( hi.formula ), hi.ordinal, lo.ordinal } );
        }
    std::sort( out.begin(), out.end(), []( const RepetitionPair& a, const RepetitionPair& b ) {
        return std::tie( a.companion, a.bud, a.alpha, a.beta ) < std::tie( b.companion, b.bud, b.alpha, b.beta );
    } );
    return out;
}

AnnotatedTree random_annotated_tree( std::mt19937_64& rng, std::size_t n )
{
    std::vector< std::string > names;
    std::vector< std::pair< StateId, StateId > > edges;
    for ( StateId i = 0; i < n; ++i )
    {
        names.push_back( "n" + std::to_string( i ) );
        if ( i > 0 )
            edges.emplace_back( rng() % i, i );
    }
    TreeFrame tree( Frame::from_indices( names, edges ), 0 );
    const std::vector< Formula > nabs{ parse_formula( "nab{x}", { "x" } ), parse_formula( "nab{}" ) };
    const std::vector< Ordinal > ords{ w( 1 ), w( 2 ), w( 3 ), w( 1 ) + Ordinal::natural( 1 ), Ordinal::natural( 2 ) };
    Annotation theta( n ), phi( n );
    for ( StateId i = 0; i < n; ++i )
    {
        if ( rng() % 4 == 0 )
            continue;
        AnnotatedFormula a{ nabs[ rng() % 2 ], ords[ rng() % ords.size() ] };
        theta.at( i ).insert( a );
        phi.at( i ).insert( a );
        if ( rng() % 3 == 0 )
            theta.insert( i, prop( "p" ), Ordinal() );
    }
    return { tree, theta, phi };
}

} // namespace

TEST_CASE( "limit states" )
{
    TreeFrame tree( path3(), 0 );
    auto step = parse_formula( "nab{x}", { "x" } );
    CHECK( limit_states( marked( tree, { { { step, Ordinal::natural( 3 ) } }, {}, {} } ) ).empty() );
    CHECK( limit_states( marked( tree, { { { step, w( 1 ) } }, {}, {} } ) ) == std::set< StateId >{ 0 } );
    CHECK( limit_states( marked( tree, { { { step, w( 1 ) + Ordinal::natural( 1 ) } }, {}, {} } ) ).empty() );
    // Only nab entries count.
    CHECK( limit_states( marked( tree, { { { var( "x" ), w( 1 ) } }, {}, {} } ) ).empty() );
}

TEST_CASE( "repetition pairs on a path" )
{
    TreeFrame tree( path3(), 0 );
    auto step = parse_formula( "nab{x}", { "x" } );
    auto found = find_repetition_pairs( marked( tree, { { { step, w( 2 ) } }, {}, { { step, w( 1 ) } } } ) );
    REQUIRE( found.size() == 1 );
    CHECK( found[ 0 ].companion == 0 );
    CHECK( found[ 0 ].bud == 2 );
    CHECK( found[ 0 ].gamma == FormulaSet{ var( "x" ) } );
    CHECK( found[ 0 ].alpha == w( 2 ) );
    CHECK( found[ 0 ].beta == w( 1 ) );

    CHECK( find_repetition_pairs( marked( tree, { { { step, w( 2 ) } }, {}, { { step, w( 2 ) } } } ) ).empty() );

    Annotation theta( 3 ), phi( 3 );
    theta.insert( 0, step, w( 2 ) );
    theta.insert( 2, step, w( 1 ) );
    theta.insert( 2, prop( "p" ), Ordinal() );
    phi.insert( 0, step, w( 2 ) );
    phi.insert( 2, step, w( 1 ) );
    phi.insert( 2, prop( "p" ), Ordinal() );
    CHECK( find_repetition_pairs( { tree, theta, phi } ).empty() );
    phi.erase( 2, prop( "p" ), Ordinal() );
    // Theta profiles still differ.
    CHECK( find_repetition_pairs( { tree, theta, phi } ).empty() );
}

TEST_CASE( "pair search agrees with a double loop" )
{
    std::mt19937_64 rng( 44 );
    int with_pairs = 0;
    for ( int i = 0; i < 300; ++i )
    {
        auto t = random_annotated_tree( rng, 1 + rng() % 50 );
        auto fast = find_repetition_pairs( t );
        REQUIRE( fast == brute_pairs( t ) );
        with_pairs += !fast.empty();
    }
    CHECK( with_pairs > 50 );
    for ( std::uint64_t seed = 0; seed < 20; ++seed )
    {
        auto t = testing::descent_fixture( seed );
        REQUIRE( find_repetition_pairs( t ) == brute_pairs( t ) );
    }
}

TEST_CASE( "repetition bound" )
{
    CHECK( repetition_bound( 2 ) == 17 );
    CHECK( repetition_bound( 4 ) == 257 );
    CHECK( repetition_bound( 0 ) == 2 );
    CHECK( repetition_bound( EquationSystem( { { "x", parse_formula( "nab{x}", { "x" } ) } } ) ) == 17 );
    // Exact beyond machine words.
    BigNat big = 1;
    for ( int i = 0; i < 200; ++i )
        big *= 2;
    CHECK( repetition_bound( 100 ) == big + 1 );
}

TEST_CASE( "descent fixtures are well-annotated relevant parts" )
{
    auto sys = testing::descent_system();
    for ( std::uint64_t seed = 0; seed < 10; ++seed )
    {
        auto t = testing::descent_fixture( seed );
        const auto& f = t.tree.frame();
        REQUIRE( check_well_annotation( t.theta, sys, f ).empty() );
        REQUIRE( check_relevant( t.phi, t.theta, sys, f ).empty() );
        REQUIRE( limit_states( t ).size() == 18 );
    }
}

TEST_CASE( "descent hypothesis" )
{
    auto sys = testing::descent_system();
    const BigNat n = 17;
    std::vector< StateId > trace( 19 );
    std::iota( trace.begin(), trace.end(), 0 );
    for ( std::uint64_t seed = 0; seed < 10; ++seed )
    {
        auto t = testing::descent_fixture( seed );
        auto out = check_descent_hypothesis( t, trace, sys, n );
        REQUIRE( std::holds_alternative< PairFound >( out ) );
        auto pair = std::get< PairFound >( out ).pair;
        CHECK( pair.beta < pair.alpha );
        CHECK( t.tree.is_proper_ancestor( pair.companion, pair.bud ) );
    }

    // Root trace at w.16 = w.(N-1).
    auto low = testing::descent_fixture( 3, 16 );
    std::vector< StateId > short_trace( 17 );
    std::iota( short_trace.begin(), short_trace.end(), 0 );
    auto unmet = check_descent_hypothesis( low, short_trace, sys, n );
    REQUIRE( std::holds_alternative< HypothesisUnmet >( unmet ) );
    CHECK( std::get< HypothesisUnmet >( unmet ).reason == "alpha0 below w.17" );

    auto gap = testing::descent_fixture( 5 );
    gap.phi.at( 7 ).clear();
    auto broken = check_descent_hypothesis( gap, trace, sys, n );
    REQUIRE( std::holds_alternative< HypothesisUnmet >( broken ) );
    CHECK( std::get< HypothesisUnmet >( broken ).reason == "relevant part empty at s7" );

    // The default bound for this system is 2^14 + 1, out of the fixture's reach.
    CHECK( std::holds_alternative< HypothesisUnmet >( check_descent_hypothesis( testing::descent_fixture( 1 ), trace, sys ) ) );
    CHECK( std::holds_alternative< HypothesisUnmet >( check_descent_hypothesis( testing::descent_fixture( 1 ), { 0, 2 }, sys, n ) ) );
}

TEST_CASE( "identity pump" )
{
    for ( std::uint64_t seed = 0; seed < 5; ++seed )
    {
        auto t = testing::descent_fixture( seed );
        for ( StateId s : { StateId{ 0 }, StateId{ 4 }, StateId{ 18 }, StateId{ 20 } } )
        {
            auto out = pump( t, s, subtree( t, s ) );
            CHECK( isomorphic( out, t ) );
        }
    }
    TreeFrame tree( path3(), 0 );
    auto t = marked( tree, { {}, {}, { { prop( "p" ), Ordinal() } } } );
    CHECK_FALSE( isomorphic( pump( t, 1, subtree( t, 0 ) ), t ) );
}

TEST_CASE( "pumping a larger annotation breaks the parent" )
{
    auto sys = EquationSystem( { { "x", parse_formula( "or{p, nab{x}}", { "x" } ) } } );
    auto p_chain = []( std::size_t k ) {
        std::vector< std::string > names;
        std::vector< std::pair< std::string, std::string > > edges;
        for ( std::size_t i = 0; i < k; ++i )
        {
            names.push_back( "c" + std::to_string( i ) );
            if ( i > 0 )
                edges.emplace_back( names[ i - 1 ], names[ i ] );
        }
        return TreeFrame( Frame( names, edges, { { "p", { names.back() } } } ), 0 );
    };
    auto small = p_chain( 3 );
    auto big = p_chain( 4 );
    AnnotatedTree t( small, conservative( sys, small.frame() ) );
    AnnotatedTree donor( big, conservative( sys, big.frame() ) );
    REQUIRE( contains( t.theta.at( 1 ), var( "x" ), Ordinal::natural( 2 ) ) );
    REQUIRE( contains( donor.theta.at( 0 ), var( "x" ), Ordinal::natural( 4 ) ) );

    auto result = pump_with_provenance( t, 1, donor );
    const auto& out = result.tree;
    CHECK( out.tree.size() == 1 + 4 );
    CHECK( !tree_violation( out.tree.frame(), out.tree.root() ) );
    auto v = check_well_annotation( out.theta, sys, out.tree.frame() );
    REQUIRE( v.size() == 1 );
    CHECK( v[ 0 ].state == out.tree.root() );
    CHECK( v[ 0 ].clause == "D3.1-5" );
    CHECK( v[ 0 ].formula->formula == parse_formula( "nab{x}", { "x" } ) );
    CHECK( v[ 0 ].formula->ordinal == Ordinal::natural( 2 ) );
    // Names of donor states clash with the kept root, so they are primed.
    CHECK( out.tree.frame().name( 1 ) == "c0'" );
    CHECK( result.provenance[ 0 ].from_donor == false );
    CHECK( result.provenance[ 1 ].from_donor == true );
    CHECK( out.tree.frame().label( "p" ).count() == 1 );
}

TEST_CASE( "pump preconditions" )
{
    auto t = testing::descent_fixture( 2 );
    auto altered = subtree( t, 3 );
    altered.theta.insert( 0, prop( "zz" ), Ordinal() );
    CHECK_THROWS_AS( pump( t, 3, altered ), RootSetMismatch );
    CHECK_THROWS_AS( pump( t, 3, subtree( t, 18 ) ), RootSetMismatch );
    CHECK_THROWS_AS( pump( t, 99, subtree( t, 3 ) ), NotATreeState );
}

TEST_CASE( "pumped state counts" )
{
    std::mt19937_64 rng( 9 );
    for ( int i = 0; i < 100; ++i )
    {
        auto t = random_annotated_tree( rng, 1 + rng() % 20 );
        auto d = random_annotated_tree( rng, 1 + rng() % 20 );
        StateId s = rng() % t.tree.size();
        d.theta.at( 0 ) = t.theta.at( s );
        d.phi.at( 0 ) = t.phi.at( s );
        auto out = pump( t, s, d );
        CHECK( out.tree.size() == t.tree.size() - t.tree.subtree( s ).size() + d.tree.size() );
        CHECK( !tree_violation( out.tree.frame(), out.tree.root() ) );
    }
}

TEST_CASE( "O estimates from a finite family" )
{
    auto x = var( "x" );
    TreeFrame one( Frame( { "r" }, {} ), 0 );
    Annotation a( 1 );
    a.insert( 0, x, w( 1 ) + Ordinal::natural( 3 ) );
    std::vector< AnnotatedTree > family{ AnnotatedTree( one, a ) };
    auto est = estimate_O( x, { x }, family );
    CHECK( est.witnessed );
    CHECK( est.ordinal == w( 1 ) + Ordinal::natural( 3 ) );
    CHECK_FALSE( estimate_O( x, { x }, {} ).witnessed );

    // Chains with p at the end against x = or{p, dia x}.
    auto ef = parse_system( "system\ninit: x\nx = or{p, dia x}\n" );
    const auto& sys = ef.system();
    std::vector< AnnotatedTree > chains;
    std::optional< FormulaSet > gamma;
    std::uint64_t best = 0;
    Ordinal previous;
    for ( std::size_t k = 2; k <= 8; ++k )
    {
        auto c = chain( k );
        StateSet p( k );
        p.set( k - 1 );
        auto f = Frame::from_indices( c.names(), c.edges(), { { "p", p } } );
        chains.emplace_back( TreeFrame( f, 0 ), conservative( sys, f ) );
        auto profile = stripped( chains.back().theta.at( 0 ) );
        if ( !gamma )
            gamma = profile;
        REQUIRE( profile == *gamma );
        best = std::max< std::uint64_t >( best, closure_ordinal_on( f, ef ) );
        auto now = estimate_O( x, *gamma, chains );
        CHECK( now.ordinal == Ordinal::natural( best ) );
        CHECK( previous <= now.ordinal );
        previous = now.ordinal;
    }
    CHECK( previous == Ordinal::natural( 8 ) );
}

TEST_CASE( "optimality verdicts" )
{
    auto x = var( "x" );
    TreeFrame one( Frame( { "r" }, {} ), 0 );
    Annotation mine( 1 );
    mine.insert( 0, x, w( 1 ) );
    AnnotatedTree t( one, mine );
    auto with = [ & ]( const Ordinal& k ) {
        Annotation a( 1 );
        a.insert( 0, x, k );
        return AnnotatedTree( one, a );
    };
    AnnotatedFormula target{ x, w( 1 ) };
    CHECK( std::holds_alternative< NotOptimal >( optimality( t, 0, target, { with( w( 2 ) ) } ) ) );
    CHECK( std::holds_alternative< PossiblyOptimal >( optimality( t, 0, target, { with( w( 1 ) + Ordinal::natural( 5 ) ) } ) ) );
    CHECK( std::holds_alternative< PossiblyOptimal >( optimality( t, 0, target, {} ) ) );
    CHECK_THROWS_AS( optimality( t, 0, { x, w( 3 ) }, {} ), InvalidParameter );
}

TEST_CASE( "companions refute optimality of their buds" )
{
    int pairs = 0;
    for ( std::uint64_t seed = 0; seed < 30; ++seed )
    {
        auto t = testing::descent_fixture( seed );
        for ( const auto& pair : find_repetition_pairs( t ) )
        {
            auto donor = subtree( t, pair.companion );
            REQUIRE_NOTHROW( pump( t, pair.bud, donor ) );
            auto verdict = optimality( t, pair.bud, { nab( { pair.gamma.begin(), pair.gamma.end() } ), pair.beta }, { donor } );
            REQUIRE( std::holds_alternative< NotOptimal >( verdict ) );
            ++pairs;
        }
    }
    CHECK( pairs >= 30 );
}
