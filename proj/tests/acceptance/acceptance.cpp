// Acceptance run: one PASS/FAIL line per criterion. Every check compares the
// library against a reference computed here from first principles.

#include "../corpus.hpp"
#include "../descent.hpp"
#include "../support.hpp"

#include <nabla/nabla.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace nabla;

namespace
{

struct Outcome
{
    bool pass = true;
    std::string detail;
};

// Records the first failure only; later ones add nothing to the diagnosis.
struct Tally
{
    Outcome out;
    std::size_t checks = 0;

    void expect( bool ok, const std::function< std::string() >& what )
    {
        ++checks;
        if ( !ok && out.pass )
        {
            out.pass = false;
            out.detail = what();
        }
    }
};

// ---- semantics references -------------------------------------------------

// Cover modality straight from its definition.
StateSet cover_by_definition( const Frame& f, const std::vector< StateSet >& members )
{
    StateSet out = f.empty_set();
    for ( StateId v = 0; v < f.size(); ++v )
    {
        const auto& succ = f.successor_set( v );
        bool hit = false;
        for ( const auto& m : members )
            hit = hit || succ.is_subset_of( m );
        for ( auto w = succ.find_first(); !hit && w != StateSet::npos; w = succ.find_next( w ) )
        {
            bool all = true;
            for ( const auto& m : members )
                all = all && m.test( w );
            hit = all;
        }
        out[ v ] = hit;
    }
    return out;
}

// W^(n+1)(x) = [[E(x)]] under W^n, W^0 empty; no union with earlier stages.
std::vector< Valuation > plain_stages( const EquationSystem& sys, const Frame& f, std::size_t count )
{
    Valuation w;
    for ( const auto& x : sys.vars() )
        w[ x ] = f.empty_set();
    std::vector< Valuation > out{ w };
    while ( out.size() < count )
    {
        Valuation next;
        for ( const auto& x : sys.vars() )
            next[ x ] = eval( sys.equation( x ), f, out.back() );
        out.push_back( std::move( next ) );
    }
    return out;
}

std::set< std::string > props_in( const EquationSystem& sys )
{
    std::set< std::string > out;
    for ( const auto& x : sys.vars() )
        collect_props( sys.equation( x ), out );
    return out;
}

// ---- 1 --------------------------------------------------------------------

Outcome nabla_law()
{
    const std::vector< std::string > sets{ "nab{}", "nab{p}", "nab{p, q}", "nab{p, !p}", "nab{ff}", "nab{tt}",
                                           "nab{ff, q}", "nab{and{p, q}, !q}", "nab{or{p, q}, !p, tt}", "nab{nab{p}}",
                                           "nab{dia p, box q}", "nab{nab{}, !q, p}" };
    std::vector< Formula > gammas;
    for ( const auto& s : sets )
        gammas.push_back( parse_formula( s ) );
    Tally t;
    std::size_t frames = 0;
    auto check = [ & ]( const Frame& f ) {
        ++frames;
        for ( const auto& n : gammas )
        {
            std::vector< StateSet > members;
            std::vector< Formula > parts;
            for ( const auto& g : n.args() )
            {
                members.push_back( eval( g, f ) );
                parts.push_back( box( g ) );
            }
            parts.push_back( dia( conj( { n.args().begin(), n.args().end() } ) ) );
            auto direct = eval( n, f );
            t.expect( direct == eval( disj( parts ), f ), [ & ] { return "law fails for " + to_string( n ) + " on\n" + to_text( f ); } );
            t.expect( direct == cover_by_definition( f, members ),
                      [ & ] { return "definition fails for " + to_string( n ) + " on\n" + to_text( f ); } );
        }
    };
    for ( const auto& f : enumerate_frames( 3, { "p", "q" } ) )
        check( f );
    const auto exhaustive = frames;
    for ( const auto& f : random_frames( 500, 8, { "p", "q" }, 0xace1 ) )
        check( f );
    if ( t.out.pass )
        t.out.detail = std::to_string( exhaustive ) + " exhaustive + " + std::to_string( frames - exhaustive ) +
                       " random frames, " + std::to_string( gammas.size() ) + " nab sets, 0 mismatches";
    return t.out;
}

// ---- 2 --------------------------------------------------------------------

Outcome approximations()
{
    testing::SystemGenerator gen{ std::mt19937_64( 2024 ) };
    Tally t;
    for ( int i = 0; i < 200; ++i )
    {
        auto sys = gen.system( 1 + gen.pick( 3 ), 3 );
        auto f = random_frame( gen.rng(), 1 + gen.pick( 6 ), 0.35, { "p", "q" } );
        const auto bound = f.size() * sys.var_count();
        auto ref = plain_stages( sys, f, bound + 2 );
        Approximation lib( sys, f );
        auto where = [ & ] { return "system\n" + to_string( EquationalFormula( sys, "x" ) ) + "frame\n" + to_text( f ); };
        for ( std::size_t n = 0; n <= bound + 1; ++n )
            for ( const auto& x : sys.vars() )
            {
                t.expect( lib.stage( n ).at( x ) == ref[ n ].at( x ), where );
                if ( n <= bound )
                    t.expect( ref[ n ].at( x ).is_subset_of( ref[ n + 1 ].at( x ) ), where );
            }
        t.expect( ref[ bound ] == ref[ bound + 1 ], where );
        t.expect( lib.stable_index() <= bound, where );
    }
    if ( t.out.pass )
        t.out.detail = "200 instances, " + std::to_string( t.checks ) + " checks, 0 violations";
    return t.out;
}

// ---- 3 --------------------------------------------------------------------

Outcome sandwich()
{
    std::vector< EquationalFormula > systems;
    for ( const auto& text : testing::translation_corpus() )
    {
        auto ef = testing::corpus_formula( text );
        if ( ef.system().var_count() == 2 )
            systems.push_back( ef );
    }
    auto frames = enumerate_frames( 2, { "p", "q" } );
    auto more = random_frames( 120, 5, { "p", "q" }, 33 );
    frames.insert( frames.end(), more.begin(), more.end() );
    Tally t;
    for ( const auto& ef : systems )
    {
        const auto& sys = ef.system();
        auto formulas = closure( sys );
        for ( const auto& f : frames )
        {
            SignatureApproximation sig( sys, f );
            Approximation plain( sys, f );
            for ( std::size_t a = 0; a <= 4; ++a )
                for ( std::size_t b = 0; b <= 4; ++b )
                {
                    const auto sum = a + b;
                    for ( const auto& psi : formulas )
                    {
                        auto low = sig.approx( psi, { a, b } );
                        auto mid = plain.approx( psi, sum );
                        auto high = sig.approx( psi, { sum, sum } );
                        t.expect( low.is_subset_of( mid ) && mid.is_subset_of( high ), [ & ] {
                            return to_string( psi ) + " at (" + std::to_string( a ) + ", " + std::to_string( b ) + ") on\n" +
                                   to_text( f );
                        } );
                    }
                }
        }
    }
    if ( t.out.pass )
        t.out.detail = std::to_string( systems.size() ) + " systems x " + std::to_string( frames.size() ) + " frames x 25 signatures, " +
                       std::to_string( t.checks ) + " checks";
    return t.out;
}

// ---- 4 --------------------------------------------------------------------

Annotation shift_all( const Annotation& theta, const Ordinal& by )
{
    Annotation out( theta.size() );
    for ( StateId s = 0; s < theta.size(); ++s )
        for ( const auto& a : theta.at( s ) )
            out.insert( s, a.formula, a.ordinal + by );
    return out;
}

Outcome kozen()
{
    testing::SystemGenerator gen{ std::mt19937_64( 77 ) };
    Tally t;
    std::size_t perturbed = 0, rejected = 0, empty = 0;
    for ( int i = 0; i < 200; )
    {
        auto sys = gen.system( 1 + gen.pick( 3 ), 3 );
        auto f = random_frame( gen.rng(), 1 + gen.pick( 6 ), 0.35, { "p", "q" } );
        auto where = [ & ] { return "system\n" + to_string( EquationalFormula( sys, "x" ) ) + "frame\n" + to_text( f ); };
        auto theta = conservative( sys, f );
        t.expect( check_well_annotation( theta, sys, f ).empty(), where );
        // Nothing holds anywhere: the empty annotation is the only sound one,
        // so there is nothing to perturb.
        if ( theta.empty() )
        {
            ++empty;
            continue;
        }
        ++i;

        const auto h = f.size() * sys.var_count();
        auto stable = plain_stages( sys, f, h + 1 ).back();
        auto sound = [ & ]( const Annotation& a ) {
            for ( StateId s = 0; s < f.size(); ++s )
                for ( const auto& e : a.at( s ) )
                    if ( !eval( e.formula, f, stable ).test( s ) )
                        return false;
            return true;
        };
        t.expect( sound( theta ), where );

        // Perturbations: uniform shifts, raised copies and deletions. Only
        // those that are still well-annotations count towards the 50.
        std::size_t valid = 0;
        for ( int attempt = 0; valid < 50 && attempt < 5000; ++attempt )
        {
            auto candidate = shift_all( theta, gen.pick( 5 ) == 0 ? Ordinal::omega() : Ordinal::natural( gen.pick( 4 ) ) );
            for ( auto edits = gen.pick( 3 ); edits > 0; --edits )
            {
                auto s = static_cast< StateId >( gen.pick( f.size() ) );
                if ( candidate.at( s ).empty() )
                    continue;
                auto it = std::next( candidate.at( s ).begin(), static_cast< long >( gen.pick( candidate.at( s ).size() ) ) );
                auto a = *it;
                if ( gen.pick( 2 ) == 0 )
                    candidate.erase( s, a.formula, a.ordinal );
                else
                    candidate.insert( s, a.formula, a.ordinal + Ordinal::natural( 1 + gen.pick( 3 ) ) );
            }
            if ( candidate == theta )
                continue;
            if ( !check_well_annotation( candidate, sys, f ).empty() )
            {
                ++rejected;
                continue;
            }
            ++valid;
            t.expect( preceq( theta, candidate ), where );
            t.expect( sound( candidate ), where );
        }
        t.expect( valid == 50, [ & ] { return "only " + std::to_string( valid ) + " valid perturbations for\n" + where(); } );
        perturbed += valid;
    }
    if ( t.out.pass )
        t.out.detail = "200 instances, " + std::to_string( perturbed ) + " valid perturbations (" + std::to_string( rejected ) +
                       " invalid discarded, " + std::to_string( empty ) + " empty annotations skipped)";
    return t.out;
}

// ---- 5 --------------------------------------------------------------------

Outcome czarnecki_growth()
{
    const auto ef = czarnecki_formula( 1 );
    Tally t;
    std::size_t previous = 0;
    std::string values;
    for ( std::size_t k = 1; k <= 12; ++k )
    {
        auto f = czarnecki( 1, k );
        auto stages = plain_stages( ef.system(), f, f.size() + 2 );
        const auto& final = stages.back().at( "x" );
        std::size_t ref = 0;
        while ( stages[ ref ].at( "x" ) != final )
            ++ref;
        auto co = closure_ordinal_on( f, ef );
        t.expect( co == ref, [ & ] { return "k=" + std::to_string( k ) + ": library " + std::to_string( co ) + ", reference " + std::to_string( ref ); } );
        t.expect( co >= k, [ & ] { return "k=" + std::to_string( k ) + ": " + std::to_string( co ) + " < k"; } );
        t.expect( k == 1 || co > previous, [ & ] { return "not increasing at k=" + std::to_string( k ); } );
        previous = co;
        values += ( values.empty() ? "" : " " ) + std::to_string( co );
    }
    if ( t.out.pass )
        t.out.detail = "closure ordinals k=1..12: " + values;
    return t.out;
}

// ---- 6 and 7 ----------------------------------------------------------------

std::vector< std::optional< StateId > > parents_of( const Frame& f )
{
    std::vector< std::optional< StateId > > out( f.size() );
    for ( auto [ a, b ] : f.edges() )
        out[ b ] = a;
    return out;
}

std::vector< RepetitionPair > brute_force_pairs( const AnnotatedTree& t )
{
    const auto& f = t.tree.frame();
    auto parent = parents_of( f );
    auto above = [ & ]( StateId a, StateId b ) {
        for ( auto p = parent[ b ]; p; p = parent[ *p ] )
            if ( *p == a )
                return true;
        return false;
    };
    std::vector< RepetitionPair > out;
    for ( StateId a = 0; a < f.size(); ++a )
        for ( StateId b = 0; b < f.size(); ++b )
        {
            if ( !above( a, b ) || stripped( t.theta.at( a ) ) != stripped( t.theta.at( b ) ) ||
                 stripped( t.phi.at( a ) ) != stripped( t.phi.at( b ) ) )
                continue;
            for ( const auto& up : t.phi.at( a ) )
                for ( const auto& down : t.phi.at( b ) )
                    if ( up.formula.is( Kind::Nabla ) && up.formula == down.formula && is_limit( up.ordinal ) &&
                         is_limit( down.ordinal ) && down.ordinal < up.ordinal )
                        out.push_back( { a, b, FormulaSet( up.formula.args().begin(), up.formula.args().end() ), up.ordinal,
                                         down.ordinal } );
        }
    std::sort( out.begin(), out.end(), []( const RepetitionPair& x, const RepetitionPair& y ) {
        return std::tie( x.companion, x.bud, x.alpha, x.beta ) < std::tie( y.companion, y.bud, y.alpha, y.beta );
    } );
    return out;
}

constexpr std::uint64_t fixture_count = 200;

Outcome pigeonhole()
{
    Tally t;
    const auto sys = testing::descent_system();
    t.expect( repetition_bound( 2 ) == 17, [] { return "repetition_bound(2) != 17"; } );
    std::size_t pairs = 0;
    for ( std::uint64_t seed = 0; seed < fixture_count; ++seed )
    {
        auto tree = testing::descent_fixture( seed );
        auto where = [ & ] { return "seed " + std::to_string( seed ); };
        t.expect( limit_states( tree ).size() == 18, where );
        std::set< std::pair< FormulaSet, FormulaSet > > profiles;
        for ( StateId s : limit_states( tree ) )
            profiles.insert( { stripped( tree.theta.at( s ) ), stripped( tree.phi.at( s ) ) } );
        t.expect( profiles.size() <= 16, where );

        std::vector< StateId > path;
        for ( StateId i = 0; i <= 18; ++i )
            path.push_back( tree.tree.frame().index( "s" + std::to_string( i ) ) );
        auto outcome = check_descent_hypothesis( tree, path, sys, BigNat( 17 ) );
        t.expect( std::holds_alternative< PairFound >( outcome ), [ & ] { return where() + ": descent hypothesis gave no pair"; } );

        auto found = find_repetition_pairs( tree );
        t.expect( !found.empty(), where );
        t.expect( found == brute_force_pairs( tree ), [ & ] { return where() + ": pair scan disagrees with brute force"; } );
        pairs += found.size();
    }
    if ( t.out.pass )
        t.out.detail = std::to_string( fixture_count ) + " fixtures, " + std::to_string( pairs ) + " pairs, brute force agrees";
    return t.out;
}

// Canonical text of an annotated subtree, children sorted.
std::string shape( const AnnotatedTree& t, StateId s )
{
    const auto& f = t.tree.frame();
    std::ostringstream os;
    os << "(";
    for ( const auto& [ p, set ] : f.labels() )
        if ( set.test( s ) )
            os << p << ",";
    os << "|";
    for ( const auto& a : t.theta.at( s ) )
        os << to_string( a ) << ( t.phi.at( s ).contains( a ) ? "*" : "" ) << ";";
    std::vector< std::string > kids;
    for ( auto c : f.successors( s ) )
        kids.push_back( shape( t, c ) );
    std::sort( kids.begin(), kids.end() );
    for ( const auto& k : kids )
        os << k;
    os << ")";
    return os.str();
}

std::string shape( const AnnotatedTree& t ) { return shape( t, t.tree.root() ); }

Outcome pump_mechanics()
{
    Tally t;
    std::size_t identities = 0, mismatches = 0, splices = 0;
    for ( std::uint64_t seed = 0; seed < fixture_count; ++seed )
    {
        auto tree = testing::descent_fixture( seed );
        const auto& f = tree.tree.frame();
        auto where = [ & ] { return "seed " + std::to_string( seed ); };
        const auto reference = shape( tree );

        auto same = pump( tree, tree.tree.root(), tree );
        t.expect( isomorphic( same, tree ) && shape( same ) == reference, where );
        ++identities;
        for ( StateId s = 0; s < f.size(); ++s )
        {
            auto again = pump( tree, s, subtree( tree, s ) );
            t.expect( isomorphic( again, tree ) && shape( again ) == reference, where );
            ++identities;

            // Toggle one literal in the donor's root set.
            auto donor = subtree( tree, s );
            auto root = donor.tree.root();
            auto p = prop( "p" );
            if ( auto least = min_ordinal( donor.theta.at( root ), p ) )
            {
                auto& set = donor.theta.at( root );
                std::erase_if( set, [ & ]( const AnnotatedFormula& a ) { return a.formula == p; } );
            }
            else
                donor.theta.insert( root, p, Ordinal() );
            bool raised = false;
            try
            {
                pump( tree, s, donor );
            }
            catch ( const RootSetMismatch& )
            {
                raised = true;
            }
            t.expect( raised, [ & ] { return where() + ": no RootSetMismatch at " + f.name( s ); } );
            ++mismatches;
        }

        // Splice acceptance: the companion subtree fits at the bud, the
        // splice keeps everything outside the bud, and the companion's
        // larger limit refutes optimality of the bud's annotation.
        for ( const auto& pair : find_repetition_pairs( tree ) )
        {
            auto donor = subtree( tree, pair.companion );
            auto result = pump_with_provenance( tree, pair.bud, donor );
            const auto expected_size = f.size() - tree.tree.subtree( pair.bud ).size() + donor.tree.size();
            t.expect( result.tree.tree.size() == expected_size, where );
            std::size_t from_donor = 0;
            for ( const auto& src : result.provenance )
                from_donor += src.from_donor;
            t.expect( from_donor == donor.tree.size(), where );
            auto nab_gamma = nab( { pair.gamma.begin(), pair.gamma.end() } );
            auto verdict = optimality( tree, pair.bud, { nab_gamma, pair.beta }, { donor } );
            t.expect( std::holds_alternative< NotOptimal >( verdict ),
                      [ & ] { return where() + ": bud " + f.name( pair.bud ) + " not refuted"; } );
            ++splices;
        }
    }
    if ( t.out.pass )
        t.out.detail = std::to_string( identities ) + " identity pumps, " + std::to_string( mismatches ) + " rejected donors, " +
                       std::to_string( splices ) + " splices accepted";
    return t.out;
}

// ---- 8 --------------------------------------------------------------------

Outcome translation()
{
    std::vector< EquationalFormula > corpus;
    for ( const auto& text : testing::translation_corpus() )
        corpus.push_back( testing::corpus_formula( text ) );
    for ( const auto* text : { "mu x. or{p, dia x}", "and{p, nab{q, !p}}", "mu x. or{p, nab{mu y. or{q, nab{x}, nab{y}}}}" } )
        corpus.push_back( to_equational( parse_formula( text ) ) );
    corpus.push_back( czarnecki_formula( 1 ) );
    corpus.push_back( czarnecki_formula( 2 ) );

    Tally t;
    std::size_t frames = 0;
    for ( const auto& ef : corpus )
    {
        auto where = [ & ] { return to_string( ef ); };
        std::pair< EquationalFormula, TranslationReport > result{ ef, { ef, ef, {}, {} } };
        try
        {
            result = to_conjunctive( ef );
        }
        catch ( const TranslationFailure& e )
        {
            t.expect( false, [ & ] { return where() + e.what(); } );
            continue;
        }
        const auto& [ out, report ] = result;
        t.expect( is_conjunctive( out.system() ), where );
        t.expect( report.oracle.equivalent() && report.oracle.frames_checked >= 500, where );

        auto props = props_in( ef.system() );
        std::vector< std::string > names( props.begin(), props.end() );
        auto check = enumerate_frames( 3, names );
        auto more = random_frames( 500, 8, names, 0xbee );
        check.insert( check.end(), more.begin(), more.end() );
        for ( const auto& f : check )
        {
            ++frames;
            t.expect( denotation( ef, f ) == denotation( out, f ), [ & ] { return where() + "differs on\n" + to_text( f ); } );
        }
    }
    if ( t.out.pass )
        t.out.detail = std::to_string( corpus.size() ) + " formulas, " + std::to_string( frames ) + " frame comparisons, 0 mismatches";
    return t.out;
}

// ---- 9 --------------------------------------------------------------------

// Ordinals below w^3 as coefficient triples (w^2, w^1, w^0).
using Coeffs = std::array< std::uint64_t, 3 >;

Ordinal from_coeffs( const Coeffs& c ) { return Ordinal::from_terms( { { 2, c[ 0 ] }, { 1, c[ 1 ] }, { 0, c[ 2 ] } } ); }

// Sum as a word of single powers, rewriting w^a w^b -> w^b when a < b.
Coeffs rewrite_sum( const Coeffs& a, const Coeffs& b )
{
    std::vector< int > word;
    for ( const auto* c : { &a, &b } )
        for ( int e = 2; e >= 0; --e )
            word.insert( word.end(), ( *c )[ 2 - e ], e );
    for ( bool changed = true; changed; )
    {
        changed = false;
        for ( std::size_t i = 0; i + 1 < word.size(); ++i )
            if ( word[ i ] < word[ i + 1 ] )
            {
                word.erase( word.begin() + static_cast< long >( i ) );
                changed = true;
                break;
            }
    }
    Coeffs out{};
    for ( int e : word )
        ++out[ 2 - e ];
    return out;
}

Outcome ordinals()
{
    std::vector< Coeffs > all;
    for ( std::uint64_t a = 0; a <= 5; ++a )
        for ( std::uint64_t b = 0; b <= 5; ++b )
            for ( std::uint64_t c = 0; c <= 5; ++c )
                all.push_back( { a, b, c } );
    Tally t;
    std::size_t pairs = 0;
    for ( const auto& a : all )
    {
        auto oa = from_coeffs( a );
        for ( const auto& b : all )
        {
            auto ob = from_coeffs( b );
            ++pairs;
            t.expect( ( oa <=> ob ) == ( a <=> b ), [ & ] { return "compare " + to_string( oa ) + " " + to_string( ob ); } );
            t.expect( oa + ob == from_coeffs( rewrite_sum( a, b ) ), [ & ] { return "add " + to_string( oa ) + " " + to_string( ob ); } );
        }
        if ( oa.is_zero() )
            continue;
        // pred(a): least b with b + w^eta = a for some eta.
        std::optional< Ordinal > least;
        for ( const auto& b : all )
            for ( std::uint32_t eta = 0; eta <= 2; ++eta )
            {
                auto ob = from_coeffs( b );
                if ( from_coeffs( rewrite_sum( b, Coeffs{ eta == 2u, eta == 1u, eta == 0u } ) ) == oa && ( !least || ob < *least ) )
                    least = ob;
            }
        t.expect( least && pred( oa ) == *least, [ & ] { return "pred " + to_string( oa ); } );
    }
    bool threw = false;
    try
    {
        pred( Ordinal() );
    }
    catch ( const ZeroHasNoPred& )
    {
        threw = true;
    }
    t.expect( threw, [] { return "pred(0) did not raise"; } );
    t.expect( pred( Ordinal::omega() + Ordinal::natural( 1 ) ) == Ordinal::omega(), [] { return "pred(w+1)"; } );
    for ( std::uint64_t k = 0; k <= 10; ++k )
        t.expect( pred( Ordinal::omega_times( k + 1 ) ) == Ordinal::omega_times( k ), [ & ] { return "pred(w.(k+1)), k=" + std::to_string( k ); } );
    if ( t.out.pass )
        t.out.detail = std::to_string( all.size() ) + " ordinals, " + std::to_string( pairs ) + " pairs";
    return t.out;
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        const char* name;
        std::function< Outcome() > run;
        double limit_seconds;
    };
    const std::vector< Criterion > criteria{
        { 1, "nabla law", nabla_law, 120 },
        { 2, "approximation monotonicity and stabilization", approximations, 0 },
        { 3, "signature sandwich", sandwich, 0 },
        { 4, "conservative annotation round trip", kozen, 0 },
        { 5, "czarnecki growth", czarnecki_growth, 60 },
        { 6, "repetition-pair pigeonhole", pigeonhole, 60 },
        { 7, "pump mechanics", pump_mechanics, 0 },
        { 8, "conjunctive translation", translation, 600 },
        { 9, "ordinal kernel", ordinals, 0 },
    };
    int failed = 0;
    for ( const auto& c : criteria )
    {
        auto start = std::chrono::steady_clock::now();
        Outcome out;
        try
        {
            out = c.run();
        }
        catch ( const std::exception& e )
        {
            out = { false, std::string( "exception: " ) + e.what() };
        }
        const double secs = std::chrono::duration< double >( std::chrono::steady_clock::now() - start ).count();
        if ( out.pass && c.limit_seconds > 0 && secs > c.limit_seconds )
            out = { false, "took " + std::to_string( secs ) + " s, limit " + std::to_string( c.limit_seconds ) + " s" };
        failed += !out.pass;
        std::ostringstream time;
        time.precision( 2 );
        time << std::fixed << secs;
        std::cout << ( out.pass ? "PASS" : "FAIL" ) << " " << c.id << " " << c.name << ": " << out.detail << " [" << time.str() << " s]"
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
