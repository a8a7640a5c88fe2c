#pragma once

// The `nabla` command line. run() is the whole program; main() only forwards
// argv so tests can drive every verb in-process.

#include "io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace nabla::cli
{

enum ExitCode : int
{
    Ok = 0,
    DomainError = 1,
    UsageError = 2,
};

// Bad invocation or unreadable input; always exit 2.
class UsageFailure : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Options
{
    std::string format = "text";
    std::string output;
    std::string system;
    std::string frame;
    std::string ann;
    std::string phi;
    std::string formula;
    std::string root;
    std::string state;
    std::string var;
    std::string ordinal;
    std::string stage;
    std::string donor_frame;
    std::string donor_ann;
    std::string donor_phi;
    std::string donor_root;
    std::string write_frame;
    std::string write_ann;
    std::string write_phi;
    std::string kind;
    std::string props = "p,q";
    std::size_t size = 3;
    std::size_t n = 1;
    std::size_t k = 1;
    std::size_t depth = 3;
    double edge_prob = 0.3;
    std::optional< std::uint64_t > seed;
    bool desugar = false;
    OracleOptions oracle;
};

namespace detail
{

inline std::string read_file( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw UsageFailure( "cannot read '" + path + "'" );
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Replaces path in one step so readers never see a partial file.
inline void write_file( const std::string& path, const std::string& content )
{
    auto tmp = path + ".tmp";
    {
        std::ofstream out( tmp, std::ios::binary | std::ios::trunc );
        if ( !out )
            throw UsageFailure( "cannot write '" + path + "'" );
        out << content;
        if ( !out.flush() )
            throw UsageFailure( "cannot write '" + path + "'" );
    }
    std::error_code ec;
    std::filesystem::rename( tmp, path, ec );
    if ( ec )
        throw UsageFailure( "cannot write '" + path + "': " + ec.message() );
}

inline bool looks_like_json( std::string_view text )
{
    auto pos = text.find_first_not_of( " \t\r\n" );
    return pos != std::string_view::npos && text[ pos ] == '{';
}

inline Json parse_json( const std::string& text, const std::string& path )
{
    try
    {
        return Json::parse( text );
    }
    catch ( const Json::parse_error& e )
    {
        throw SyntaxError( path + ": " + e.what(), 1, 1 );
    }
}

inline std::vector< std::string > split_list( const std::string& s )
{
    std::vector< std::string > out;
    std::stringstream in( s );
    for ( std::string item; std::getline( in, item, ',' ); )
        if ( !item.empty() )
            out.push_back( item );
    return out;
}

template < typename T >
Json single( const std::string& key, const T& value )
{
    Json j = Json::object();
    j[ key ] = value;
    return j;
}

class Runner
{
    const Options& _o;
    std::ostream& _out;

    void require( const std::string& value, const std::string& flag ) const
    {
        if ( value.empty() )
            throw UsageFailure( "missing required option " + flag );
    }

    void emit( const std::string& text ) const
    {
        if ( _o.output.empty() )
            _out << text;
        else
            write_file( _o.output, text );
    }

    void emit( const Json& j ) const { emit( j.dump( 2 ) + "\n" ); }

    void no_dot() const
    {
        if ( _o.format == "dot" )
            throw UsageFailure( "--format dot applies to frames and annotated trees only" );
    }

    [[nodiscard]] bool json() const { return _o.format == "json"; }

    EquationalFormula load_system() const
    {
        require( _o.system, "--system" );
        auto text = read_file( _o.system );
        if ( looks_like_json( text ) )
            return system_from_json( parse_json( text, _o.system ) );
        return parse_system( text );
    }

    static FrameDocument load_frame_doc( const std::string& path )
    {
        auto text = read_file( path );
        if ( looks_like_json( text ) )
            return frame_from_json( parse_json( text, path ) );
        return parse_frame( text );
    }

    Frame load_frame() const
    {
        require( _o.frame, "--frame" );
        return load_frame_doc( _o.frame ).frame;
    }

    // Root from --root, else the file's `root:` line, else the first state.
    TreeFrame load_tree( const std::string& path, bool use_root_flag ) const
    {
        auto doc = load_frame_doc( path );
        if ( use_root_flag && !_o.root.empty() )
            return { doc.frame, doc.frame.index( _o.root ) };
        return { doc.frame, doc.root.value_or( 0 ) };
    }

    static Annotation load_annotation( const std::string& path, const EquationSystem& sys, const Frame& f )
    {
        auto text = read_file( path );
        if ( looks_like_json( text ) )
            return annotation_from_json( parse_json( text, path ), sys, f );
        return parse_annotation( text, sys, f );
    }

    AnnotatedTree load_annotated( const std::string& frame, const std::string& ann, const std::string& phi,
                                  const EquationSystem& sys, bool use_root_flag ) const
    {
        auto tree = load_tree( frame, use_root_flag );
        auto theta = load_annotation( ann, sys, tree.frame() );
        std::optional< Annotation > rel;
        if ( !phi.empty() )
            rel = load_annotation( phi, sys, tree.frame() );
        return { std::move( tree ), std::move( theta ), std::move( rel ) };
    }

    void emit_frame( const Frame& f, std::optional< StateId > root = std::nullopt ) const
    {
        if ( _o.format == "json" )
            emit( to_json( f, root ) );
        else if ( _o.format == "dot" )
            emit( to_dot( f, root ) );
        else
            emit( to_text( f, root ) );
    }

    void write_parts( const AnnotatedTree& t ) const
    {
        if ( !_o.write_frame.empty() )
            write_file( _o.write_frame, to_text( t.tree ) );
        if ( !_o.write_ann.empty() )
            write_file( _o.write_ann, to_text( t.theta, t.tree.frame() ) );
        if ( !_o.write_phi.empty() )
            write_file( _o.write_phi, to_text( t.phi, t.tree.frame() ) );
    }

    void emit_tree( const AnnotatedTree& t, const std::optional< Json >& extra_json = std::nullopt,
                    const std::string& extra_text = {} ) const
    {
        write_parts( t );
        if ( _o.format == "json" )
            emit( extra_json.value_or( to_json( t ) ) );
        else if ( _o.format == "dot" )
            emit( to_dot( t ) );
        else
            emit( "# frame\n" + to_text( t.tree ) + "# annotation\n" + to_text( t.theta, t.tree.frame() ) +
                  "# relevant\n" + to_text( t.phi, t.tree.frame() ) + extra_text );
    }

    void emit_violations( const std::vector< Violation >& vs, const Frame& f ) const
    {
        no_dot();
        if ( json() )
            emit( to_json( vs, f ) );
        else
            emit( violations_text( vs, f ) );
    }

    std::string state_list( const Frame& f, const StateSet& set ) const
    {
        std::string out;
        for ( const auto& n : f.names_of( set ) )
            out += ( out.empty() ? "" : " " ) + n;
        return out;
    }

public:
    Runner( const Options& o, std::ostream& out ) : _o{ o }, _out{ out } {}

    void parse( bool desugar_flag ) const
    {
        no_dot();
        if ( !_o.formula.empty() )
        {
            auto phi = parse_formula( _o.formula, std::set< std::string >{}, ParseOptions{ .keep_sugar = true } );
            if ( desugar_flag )
                phi = desugar( phi );
            if ( json() )
                emit( single( "formula", to_string( phi ) ) );
            else
                emit( to_string( phi ) + "\n" );
            return;
        }
        if ( _o.system.empty() )
            throw UsageFailure( "give --formula or --system" );
        auto ef = load_system();
        if ( json() )
            emit( to_json( ef ) );
        else
            emit( to_string( ef ) );
    }

    void eval_verb() const
    {
        no_dot();
        auto f = load_frame();
        StateSet set;
        if ( !_o.formula.empty() )
            set = eval( parse_formula( _o.formula ), f );
        else
            set = denotation( load_system(), f );
        if ( json() )
            emit( single( "states", f.names_of( set ) ) );
        else
            emit( state_list( f, set ) + "\n" );
    }

    void approx_verb() const
    {
        no_dot();
        auto ef = load_system();
        auto f = load_frame();
        require( _o.stage, "--stage" );
        auto alpha = parse_ordinal( _o.stage );
        Approximation a( ef.system(), f );
        const auto& stage = a.stage( alpha );
        std::vector< std::string > vars = ef.system().vars();
        if ( !_o.var.empty() )
        {
            if ( !ef.system().contains( _o.var ) )
                throw UnboundVariable( "no equation for '" + _o.var + "'" );
            vars = { _o.var };
        }
        if ( json() )
        {
            Json j{ { "stage", to_string( alpha ) }, { "vars", Json::object() } };
            for ( const auto& x : vars )
                j[ "vars" ][ x ] = f.names_of( stage.at( x ) );
            emit( j );
            return;
        }
        std::string text;
        for ( const auto& x : vars )
            text += x + ": " + state_list( f, stage.at( x ) ) + "\n";
        emit( text );
    }

    void co() const
    {
        no_dot();
        auto ef = load_system();
        auto kappa = closure_ordinal_on( load_frame(), ef );
        if ( json() )
            emit( single( "closure_ordinal", kappa ) );
        else
            emit( std::to_string( kappa ) + "\n" );
    }

    void annotate() const
    {
        auto ef = load_system();
        require( _o.frame, "--frame" );
        auto doc = load_frame_doc( _o.frame );
        auto theta = conservative( ef.system(), doc.frame );
        if ( _o.format == "json" )
            emit( to_json( theta, doc.frame ) );
        else if ( _o.format == "dot" )
            emit( to_dot( doc.frame, doc.root, &theta ) );
        else
            emit( to_text( theta, doc.frame ) );
    }

    void check_ann( bool conservative_only ) const
    {
        auto ef = load_system();
        auto f = load_frame();
        require( _o.ann, "--ann" );
        auto theta = load_annotation( _o.ann, ef.system(), f );
        emit_violations( conservative_only ? verify_conservative( theta, ef.system(), f )
                                           : check_well_annotation( theta, ef.system(), f ),
                         f );
    }

    void relevant() const
    {
        auto ef = load_system();
        require( _o.frame, "--frame" );
        auto tree = load_tree( _o.frame, true );
        auto theta = _o.ann.empty() ? conservative( ef.system(), tree.frame() )
                                    : load_annotation( _o.ann, ef.system(), tree.frame() );
        auto x = _o.var.empty() ? ef.init() : _o.var;
        auto part = _o.ordinal.empty() ? extract_relevant( tree, theta, ef.system(), x )
                                       : extract_relevant( tree, theta, ef.system(), x, parse_ordinal( _o.ordinal ) );
        emit_tree( AnnotatedTree( part ) );
    }

    void pairs() const
    {
        no_dot();
        auto ef = load_system();
        require( _o.frame, "--frame" );
        require( _o.ann, "--ann" );
        require( _o.phi, "--phi" );
        auto t = load_annotated( _o.frame, _o.ann, _o.phi, ef.system(), true );
        auto found = find_repetition_pairs( t );
        const auto& f = t.tree.frame();
        if ( json() )
        {
            Json j{ { "pairs", Json::array() } };
            for ( const auto& p : found )
                j[ "pairs" ].push_back( to_json( p, f ) );
            emit( j );
            return;
        }
        std::string text;
        for ( const auto& p : found )
            text += to_text( p, f ) + "\n";
        text += std::to_string( found.size() ) + ( found.size() == 1 ? " pair\n" : " pairs\n" );
        emit( text );
    }

    void pump_verb() const
    {
        auto ef = load_system();
        require( _o.frame, "--frame" );
        require( _o.ann, "--ann" );
        require( _o.state, "--state" );
        require( _o.donor_frame, "--donor-frame" );
        require( _o.donor_ann, "--donor-ann" );
        auto t = load_annotated( _o.frame, _o.ann, _o.phi, ef.system(), true );
        auto donor = load_annotated( _o.donor_frame, _o.donor_ann, _o.donor_phi, ef.system(), false );
        if ( !_o.donor_root.empty() )
            donor = subtree( donor, donor.tree.frame().index( _o.donor_root ) );
        auto result = pump_with_provenance( t, t.tree.frame().index( _o.state ), donor );
        std::string log = "# provenance\n";
        const auto& pf = result.tree.tree.frame();
        for ( StateId i = 0; i < result.provenance.size(); ++i )
        {
            const auto& src = result.provenance[ i ];
            log += "# " + pf.name( i ) + " <- " + ( src.from_donor ? "donor " + donor.tree.frame().name( src.state )
                                                                  : "tree " + t.tree.frame().name( src.state ) ) + "\n";
        }
        emit_tree( result.tree, to_json( result, t.tree.frame(), donor.tree.frame() ), log );
    }

    void conjunctive() const
    {
        no_dot();
        auto ef = load_system();
        auto [ out, report ] = to_conjunctive( ef, _o.oracle );
        if ( json() )
        {
            emit( to_json( report ) );
            return;
        }
        std::string text = to_string( out );
        std::istringstream lines( to_string( report ) );
        for ( std::string line; std::getline( lines, line ); )
            text += "# " + line + "\n";
        emit( text );
    }

    void gen( const std::optional< std::uint64_t >& env_seed ) const
    {
        require( _o.kind, "--kind" );
        if ( _o.kind == "chain" )
            emit_frame( chain( _o.size ), 0 );
        else if ( _o.kind == "czarnecki" )
            emit_frame( czarnecki( _o.n, _o.k ), 0 );
        else if ( _o.kind == "czarnecki-system" )
        {
            no_dot();
            auto ef = czarnecki_formula( _o.n );
            emit( json() ? to_json( ef ).dump( 2 ) + "\n" : to_string( ef ) );
        }
        else if ( _o.kind == "random" )
        {
            auto seed = _o.seed ? _o.seed : env_seed;
            if ( !seed )
                throw UsageFailure( "random generation needs --seed or NABLA_SEED" );
            emit_frame( random_frame( *seed, _o.size, _o.edge_prob, split_list( _o.props ) ) );
        }
        else if ( _o.kind == "unravel" )
        {
            require( _o.state, "--state" );
            auto f = load_frame();
            auto t = unravel( f, _o.state, _o.depth );
            emit_frame( t.frame(), t.root() );
        }
        else
            throw UsageFailure( "unknown --kind '" + _o.kind + "'" );
    }
};

inline std::optional< std::uint64_t > env_seed()
{
    const char* v = std::getenv( "NABLA_SEED" );
    if ( !v || !*v )
        return std::nullopt;
    try
    {
        std::size_t used = 0;
        auto seed = std::stoull( v, &used, 0 );
        if ( used != std::string_view( v ).size() )
            throw std::invalid_argument( v );
        return seed;
    }
    catch ( const std::exception& )
    {
        throw UsageFailure( std::string( "NABLA_SEED is not a number: '" ) + v + "'" );
    }
}

} // namespace detail

// args excludes the program name.
inline int run( const std::vector< std::string >& args, std::ostream& out, std::ostream& err )
{
    Options o;
    CLI::App app( "Cover-modality fixpoint formulas: evaluation, annotations and normal forms", "nabla" );
    app.require_subcommand( 1 );
    app.set_help_all_flag( "--help-all", "Show help for every verb" );

    auto common = [ & ]( CLI::App* sub ) {
        sub->add_option( "--format", o.format, "text, json or dot" )->check( CLI::IsMember( { "text", "json", "dot" } ) );
        sub->add_option( "-o,--output", o.output, "Write the result to this path instead of stdout" );
    };
    auto with_system = [ & ]( CLI::App* sub ) { sub->add_option( "--system", o.system, ".mes or JSON system" ); };
    auto with_frame = [ & ]( CLI::App* sub ) { sub->add_option( "--frame", o.frame, ".frame or JSON frame" ); };
    auto with_writes = [ & ]( CLI::App* sub ) {
        sub->add_option( "--write-frame", o.write_frame, "Also write the tree as .frame" );
        sub->add_option( "--write-ann", o.write_ann, "Also write the annotation as .ann" );
        sub->add_option( "--write-phi", o.write_phi, "Also write the relevant part as .ann" );
    };

    std::map< std::string, std::function< void( const detail::Runner& ) > > verbs;
    auto verb = [ & ]( const std::string& name, const std::string& help, std::function< void( const detail::Runner& ) > fn ) {
        auto* sub = app.add_subcommand( name, help );
        common( sub );
        verbs[ name ] = std::move( fn );
        return sub;
    };

    auto* parse = verb( "parse", "Parse and print a formula or system", []( const auto& r ) { r.parse( false ); } );
    parse->add_option( "--formula", o.formula, "Formula text" );
    with_system( parse );
    parse->add_flag( "--desugar", o.desugar, "Expand box and dia into nab" );

    auto* desugar_cmd = verb( "desugar", "Print a formula with box and dia expanded", []( const auto& r ) { r.parse( true ); } );
    desugar_cmd->add_option( "--formula", o.formula, "Formula text" );
    with_system( desugar_cmd );

    auto* eval_cmd = verb( "eval", "States satisfying a closed formula or system", []( const auto& r ) { r.eval_verb(); } );
    eval_cmd->add_option( "--formula", o.formula, "Closed formula text" );
    with_system( eval_cmd );
    with_frame( eval_cmd );

    auto* approx_cmd = verb( "approx", "Approximation stage of every variable", []( const auto& r ) { r.approx_verb(); } );
    with_system( approx_cmd );
    with_frame( approx_cmd );
    approx_cmd->add_option( "--stage", o.stage, "Stage ordinal, e.g. 3 or w" );
    approx_cmd->add_option( "--var", o.var, "Only this variable" );

    auto* co_cmd = verb( "co", "Closure ordinal of a system on a frame", []( const auto& r ) { r.co(); } );
    with_system( co_cmd );
    with_frame( co_cmd );

    auto* annotate_cmd = verb( "annotate", "Conservative annotation", []( const auto& r ) { r.annotate(); } );
    with_system( annotate_cmd );
    with_frame( annotate_cmd );

    auto* check_cmd = verb( "check-ann", "Check well-annotation", []( const auto& r ) { r.check_ann( false ); } );
    with_system( check_cmd );
    with_frame( check_cmd );
    check_cmd->add_option( "--ann", o.ann, ".ann or JSON annotation" );

    auto* cons_cmd = verb( "conservative-check", "Compare with the conservative annotation",
                           []( const auto& r ) { r.check_ann( true ); } );
    with_system( cons_cmd );
    with_frame( cons_cmd );
    cons_cmd->add_option( "--ann", o.ann, ".ann or JSON annotation" );

    auto* rel_cmd = verb( "relevant", "Extract a relevant part on a tree", []( const auto& r ) { r.relevant(); } );
    with_system( rel_cmd );
    with_frame( rel_cmd );
    rel_cmd->add_option( "--ann", o.ann, "Annotation (default: conservative)" );
    rel_cmd->add_option( "--root", o.root, "Root state" );
    rel_cmd->add_option( "--var", o.var, "Traced variable (default: init)" );
    rel_cmd->add_option( "--ordinal", o.ordinal, "Traced ordinal (default: least at the root)" );
    with_writes( rel_cmd );

    auto* pairs_cmd = verb( "pairs", "Repetition pairs of an annotated tree", []( const auto& r ) { r.pairs(); } );
    with_system( pairs_cmd );
    with_frame( pairs_cmd );
    pairs_cmd->add_option( "--ann", o.ann, "Annotation" );
    pairs_cmd->add_option( "--phi", o.phi, "Relevant part" );
    pairs_cmd->add_option( "--root", o.root, "Root state" );

    auto* pump_cmd = verb( "pump", "Replace a subtree by a donor tree", []( const auto& r ) { r.pump_verb(); } );
    with_system( pump_cmd );
    with_frame( pump_cmd );
    pump_cmd->add_option( "--ann", o.ann, "Annotation" );
    pump_cmd->add_option( "--phi", o.phi, "Relevant part" );
    pump_cmd->add_option( "--root", o.root, "Root state" );
    pump_cmd->add_option( "--state", o.state, "State whose subtree is replaced" );
    pump_cmd->add_option( "--donor-frame", o.donor_frame, "Donor tree" );
    pump_cmd->add_option( "--donor-ann", o.donor_ann, "Donor annotation" );
    pump_cmd->add_option( "--donor-phi", o.donor_phi, "Donor relevant part" );
    pump_cmd->add_option( "--donor-root", o.donor_root, "Use the donor subtree below this state" );
    with_writes( pump_cmd );

    auto* conj_cmd = verb( "conjunctive", "Translate into conjunctive form", []( const auto& r ) { r.conjunctive(); } );
    with_system( conj_cmd );
    conj_cmd->add_option( "--exhaustive", o.oracle.exhaustive_states, "Oracle: all frames up to this many states" );
    conj_cmd->add_option( "--random", o.oracle.random_count, "Oracle: number of random frames" );
    conj_cmd->add_option( "--random-states", o.oracle.random_max_states, "Oracle: random frame size bound" );
    conj_cmd->add_option( "--oracle-seed", o.oracle.seed, "Oracle: seed for random frames" );

    auto* gen_cmd = verb( "gen", "Generate frames and fixture systems", []( const auto& ) {} );
    gen_cmd->add_option( "--kind", o.kind, "chain, czarnecki, czarnecki-system, random or unravel" );
    gen_cmd->add_option( "--size", o.size, "States (chain, random)" );
    gen_cmd->add_option( "--n", o.n, "Nesting (czarnecki)" );
    gen_cmd->add_option( "--k", o.k, "Chain length (czarnecki)" );
    gen_cmd->add_option( "--edge-prob", o.edge_prob, "Edge probability (random)" );
    gen_cmd->add_option( "--props", o.props, "Comma-separated propositions (random)" );
    gen_cmd->add_option( "--seed", o.seed, "Seed (random); defaults to NABLA_SEED" );
    gen_cmd->add_option( "--state", o.state, "Start state (unravel)" );
    gen_cmd->add_option( "--depth", o.depth, "Depth (unravel)" );
    with_frame( gen_cmd );

    std::vector< std::string > reversed( args.rbegin(), args.rend() );
    try
    {
        app.parse( reversed );
    }
    catch ( const CLI::ParseError& e )
    {
        app.exit( e, out, err );
        return e.get_exit_code() == 0 ? Ok : UsageError;
    }

    try
    {
        detail::Runner runner( o, out );
        auto* chosen = app.get_subcommands().front();
        if ( chosen->get_name() == "gen" )
            runner.gen( detail::env_seed() );
        else if ( chosen->get_name() == "parse" && o.desugar )
            runner.parse( true );
        else
            verbs.at( chosen->get_name() )( runner );
        return Ok;
    }
    catch ( const UsageFailure& e )
    {
        err << "usage error: " << e.what() << "\n";
        return UsageError;
    }
    catch ( const SyntaxError& e )
    {
        err << "parse error: " << e.what() << "\n";
        return UsageError;
    }
    catch ( const Error& e )
    {
        err << "error: " << e.what() << "\n";
        return DomainError;
    }
    catch ( const std::exception& e )
    {
        err << "error: " << e.what() << "\n";
        return DomainError;
    }
}

} // namespace nabla::cli
