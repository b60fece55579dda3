#include "mf/affine.hpp"
#include "mf/analysis.hpp"
#include "mf/gap.hpp"
#include "mf/hm.hpp"
#include "mf/io.hpp"
#include "mf/locator.hpp"
#include "mf/measure_ops.hpp"
#include "mf/monofractal.hpp"
#include "mf/wavelet.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace mf;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kFlags = 2, kInfeasible = 3, kBudget = 4 };

struct FlagError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Rational flag_rational(const std::string& name, const std::string& v)
{
    try {
        return parse_rational(v);
    } catch (const std::exception&) {
        throw FlagError("--" + name + ": '" + v + "' is not a rational p/q");
    }
}

Dyadic flag_dyadic(const std::string& name, const std::string& v)
{
    try {
        return Dyadic::parse(v);
    } catch (const std::exception&) {
        throw FlagError("--" + name + ": '" + v + "' is not dyadic");
    }
}

// JSON-lines run log, stdout unless --log names a file
class RunLog {
public:
    void open(const std::string& path)
    {
        if (path.empty()) return;
        file_.open(path, std::ios::binary);
        if (!file_) throw FlagError("--log: cannot write " + path);
    }
    void put(const json& rec) { (file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout) << rec.dump() << '\n'; }

private:
    std::ofstream file_;
};

RunLog g_log;

void log_deviations(const std::vector<std::string>& devs)
{
    for (const auto& d : devs) g_log.put({{"event", "deviation"}, {"text", d}});
}

// ---- synth-affine

struct AffineOpts {
    std::string alpha0, beta0, d, eta, mode = "desk", out;
    unsigned depth = 1;
    std::vector<unsigned> j;
    bool normalize = false, strict_budget = false;
    std::size_t breakpoint_budget = default_breakpoint_budget();
    std::size_t mark_budget = default_mark_budget();
};

int run_synth_affine(const AffineOpts& o)
{
    AffineParams p{flag_rational("alpha0", o.alpha0), flag_rational("beta0", o.beta0), flag_rational("d", o.d),
                   flag_rational("eta", o.eta)};
    if (o.mode != "desk" && o.mode != "faithful") throw FlagError("--mode must be desk or faithful");
    Mode mode = o.mode == "desk" ? Mode::desk : Mode::faithful;
    LevelPlan plan;
    try {
        plan = plan_levels(p, o.depth, mode, o.j);
    } catch (const InfeasibleError& e) {
        g_log.put({{"event", "infeasible"}, {"report", e.what()}});
        throw;
    }
    std::vector<unsigned> js;
    for (const auto& L : plan.levels) js.push_back(L.J);
    json recipe = io::affine_recipe(p, o.depth, Mode::desk, js, o.normalize);
    if (mode == Mode::faithful) recipe["planned_as"] = "faithful";
    json report = io::plan_report(plan);
    g_log.put({{"event", "plan"}, {"plan", report}});
    log_deviations(plan.violations);
    for (const auto& s : plan.substitutions) g_log.put({{"event", "substitution"}, {"text", s}});
    auto z = std::make_shared<const AffineFunction>(make_affine(plan, o.mark_budget));
    json marks = json::array();
    for (const auto& v : z->sets().marks) marks.push_back(v.size());
    g_log.put({{"event", "marks"}, {"per_level", marks}, {"breakpoints", z->breakpoint_count()}});
    json prov = {{"kind", "affine"}, {"plan", report}};
    json doc;
    if (z->breakpoint_count() <= o.breakpoint_budget) {
        PiecewiseAffine f = assemble(*z, o.breakpoint_budget);
        if (o.normalize) {
            Rational inv = 1 / z->total().to_rational();
            for (auto& v : f.y) v *= inv;
        }
        f.provenance = prov;
        doc = io::function_json(f, recipe);
    } else {
        if (o.strict_budget)
            throw BudgetError("assembled function needs about " + std::to_string(z->breakpoint_count()) +
                              " breakpoints, budget is " + std::to_string(o.breakpoint_budget));
        std::string why = "breakpoint count " + std::to_string(z->breakpoint_count()) + " exceeds the budget " +
                          std::to_string(o.breakpoint_budget);
        g_log.put({{"event", "implicit"}, {"reason", why}});
        doc = io::implicit_json(recipe, prov, why);
    }
    io::write_json(o.out, doc);
    return kOk;
}

// ---- synth-concat

int run_synth_concat(const std::vector<std::string>& in, const std::string& out, std::size_t budget)
{
    if (in.empty()) throw FlagError("--in: at least one input required");
    json parts = json::array();
    for (const auto& path : in) {
        json doc = io::read_json(path);
        if (doc.contains("recipe") && !doc.contains("breakpoints")) parts.push_back(doc.at("recipe"));
        else parts.push_back({{"kind", "explicit"}, {"document", doc}});
    }
    json recipe = {{"kind", "concat"}, {"parts", parts}, {"breakpoint_budget", budget}};
    io::Model m = io::build_model(recipe);
    g_log.put({{"event", "concat"}, {"inputs", in.size()}, {"breakpoints", m.pwa->size()}});
    io::write_json(out, io::function_json(*m.pwa, recipe));
    return kOk;
}

// ---- synth-hm

struct HmOpts {
    std::string family, out;
    std::vector<std::string> piece;
    HmConfig cfg;
};

FamilySpectrum parse_pieces(const std::vector<std::string>& pieces)
{
    FamilySpectrum f;
    for (const auto& s : pieces) {
        std::vector<std::string> t;
        std::stringstream ss(s);
        for (std::string x; std::getline(ss, x, ',');) t.push_back(x);
        if (t.size() != 3) throw FlagError("--piece expects lo,hi,value");
        f.pieces.push_back({flag_rational("piece", t[0]), flag_rational("piece", t[1]), flag_rational("piece", t[2])});
    }
    return f;
}

int run_synth_hm(const HmOpts& o)
{
    FamilySpectrum fam;
    if (!o.family.empty()) fam = io::family_from_json(io::read_json(o.family));
    else fam = parse_pieces(o.piece);
    if (fam.pieces.empty()) throw FlagError("give --family or at least one --piece");
    auto v = validate_family(fam);
    if (!v.ok) throw FlagError("invalid family: " + v.errors.front());
    json recipe = {{"kind", "hm"},
                   {"family", io::family_to_json(fam)},
                   {"affine_j", o.cfg.affine_j},
                   {"pieces", o.cfg.pieces},
                   {"steps", o.cfg.steps},
                   {"mono_depth", o.cfg.mono_depth},
                   {"amp_c", o.cfg.amp_c},
                   {"exact_amplitude", o.cfg.exact_amplitude}};
    io::Model m = io::build_model(recipe);
    for (const auto& rec : m.hm->log) {
        json e = {{"event", "insertion"}};
        e.update(rec);
        g_log.put(e);
    }
    log_deviations(m.hm->deviations);
    json prov = {{"kind", "hm"},
                 {"insertions", m.hm->f.insertions.size()},
                 {"homogeneity", homogeneity_diagnostic(*m.hm, o.cfg.pieces)},
                 {"summable", amplitudes_summable(*m.hm)},
                 {"tail_bound", tail_bound(*m.hm).str()}};
    io::write_json(o.out, io::implicit_json(recipe, prov, "Z_0 has non-dyadic breakpoints"));
    return kOk;
}

// ---- synth-mono

int run_synth_mono(unsigned n, unsigned max_bits, const std::string& out)
{
    MonoSequences s = gen_sequences(n, max_bits);
    auto c = check_sequences(s);
    json a = json::array(), b = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        a.push_back(rstr(s.a[i]));
        b.push_back(s.b[i].str());
    }
    g_log.put({{"event", "sequences"}, {"a", a}, {"b", b}, {"ok", c.ok}, {"failures", c.failures}});
    if (!c.ok) throw InfeasibleError("sequence inequalities fail: " + c.failures.front());
    json recipe = {{"kind", "mono"}, {"n", n}};
    json prov = {{"kind", "mono"}, {"a", a}, {"b", b}};
    io::write_json(out, io::implicit_json(recipe, prov, "breakpoints k/b_n are not dyadic"));
    return kOk;
}

// ---- synth-gap

struct GapOpts {
    GapConfig cfg;
    std::string out;
};

int run_synth_gap(const GapOpts& o)
{
    json recipe = {{"kind", "gap"},
                   {"levels", o.cfg.levels},
                   {"blocks", o.cfg.tmpl.blocks},
                   {"micro_j", o.cfg.tmpl.micro_j},
                   {"weight_ratio", o.cfg.tmpl.weight_ratio},
                   {"kappa_cap_exp", o.cfg.kappa_cap_exp}};
    io::Model m = io::build_model(recipe);
    for (const auto& rec : m.gap->log) {
        json e = {{"event", "level"}};
        e.update(rec);
        g_log.put(e);
    }
    for (const auto& s : m.gap->tmpl.skipped) g_log.put({{"event", "template-skip"}, {"text", s}});
    json lv = json::array();
    for (const auto& L : m.gap->levels)
        lv.push_back({{"p", L.p}, {"delta", L.delta.str()}, {"s", L.s.str()}, {"points", L.points.size()}});
    json prov = {{"kind", "gap"}, {"levels", lv}, {"total", rstr(m.gap->total())}};
    io::write_json(o.out, io::implicit_json(recipe, prov, "subdivision counts exceed any breakpoint budget"));
    return kOk;
}

// ---- wavelet

struct WaveletOpts {
    std::string in, alpha = "1/2", beta = "3/2", basis = "haar", coeffs, signal, report;
    unsigned jmax = 12, jmin = 4, points = 16;
    std::size_t window = 4;
};

int run_wavelet(const WaveletOpts& o)
{
    io::Model m = io::load_model(io::read_json(o.in));
    Rational a = flag_rational("alpha", o.alpha), b = flag_rational("beta", o.beta);
    wavelet(o.basis);
    auto c = measure_to_coeffs(m, a, b, o.jmax);
    if (!o.coeffs.empty()) io::write_text(o.coeffs, io::coefficients_csv(c));
    std::vector<Dyadic> pts;
    for (unsigned i = 0; i < o.points; ++i) pts.push_back(Dyadic::make(2 * Int(i) + 1, 1 + 31 - __builtin_clz(std::max(1u, o.points))));
    auto t = transfer_check(m, a, b, pts, o.basis, o.jmax, o.jmin, o.window);
    if (!o.signal.empty()) io::write_text(o.signal, io::signal_csv(t.signal));
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back({{"x", r.x.str()}, {"h_in", io::fmt(r.h_in)}, {"h_out", io::fmt(r.h_out)}});
    json rep = {{"basis", o.basis},
                {"alpha", rstr(a)},
                {"beta", rstr(b)},
                {"jmax", o.jmax},
                {"rows", rows},
                {"slope", io::fmt(t.fit.slope)},
                {"intercept", io::fmt(t.fit.intercept)},
                {"expected_slope", io::fmt(to_double(b - a))},
                {"expected_intercept", io::fmt(to_double(a))}};
    if (!o.report.empty()) io::write_json(o.report, rep);
    g_log.put({{"event", "wavelet"}, {"slope", rep["slope"]}, {"intercept", rep["intercept"]}});
    return kOk;
}

// ---- analyze

struct AnalyzeOpts {
    std::string in, op, out, lo = "0", hi = "1", beta = "1";
    unsigned j = 14, jmin = 4, jmax = 16, g = 12, grid = 0, depth = 1;
    std::size_t bins = 20, window = 4;
    double h_max = 2.0;
    std::vector<std::string> x, t{"1", "2", "5", "10"};
};

int run_analyze(const AnalyzeOpts& o)
{
    io::Model m = io::load_model(io::read_json(o.in));
    Dyadic lo = flag_dyadic("lo", o.lo), hi = flag_dyadic("hi", o.hi);
    if (o.op == "coarse-spectrum") {
        auto s = coarse_spectrum(m, o.j, o.bins, o.h_max, lo, hi);
        io::write_text(o.out, io::spectrum_csv(s));
        double worst;
        bool ub = upper_bound_holds(s, &worst);
        g_log.put({{"event", "coarse-spectrum"}, {"cells", s.cells}, {"flat", s.flat}, {"upper_bound", ub}});
    } else if (o.op == "local-exponent") {
        std::vector<Dyadic> xs;
        for (const auto& v : o.x) xs.push_back(flag_dyadic("x", v));
        if (o.grid)
            for (Int k = 1; k < pow2i(o.grid); ++k) xs.push_back(Dyadic::make(k, o.grid));
        if (xs.empty()) throw FlagError("give --x or --grid");
        std::ostringstream csv;
        csv << "x,h\n";
        for (const auto& x : xs) csv << x.str() << ',' << io::fmt(local_exponent(m, x, o.jmin, o.jmax, o.window)) << '\n';
        io::write_text(o.out, csv.str());
    } else if (o.op == "maximal") {
        std::vector<Rational> ts;
        for (const auto& v : o.t) ts.push_back(flag_rational("t", v));
        auto mp = maximal_function(m, lo, hi, flag_rational("beta", o.beta), o.g, ts);
        io::write_text(o.out, io::maximal_csv(mp));
    } else if (o.op == "trend") {
        auto tr = oscillation_trend(m, o.jmin, o.jmax);
        std::ostringstream csv;
        csv << "log2_2r,log2_max_osc\n";
        for (std::size_t i = 0; i < tr.log_radius.size(); ++i)
            csv << io::fmt(tr.log_radius[i]) << ',' << io::fmt(tr.log_max_osc[i]) << '\n';
        io::write_text(o.out, csv.str());
        g_log.put({{"event", "trend"}, {"slope", io::fmt(tr.slope)}});
    } else if (o.op == "darboux") {
        auto s = coarse_spectrum(m, o.j, o.bins, o.h_max, lo, hi);
        auto d = darboux_gap_check(s);
        io::write_json(o.out, {{"pass", d.pass}, {"lowest_bin", d.lowest}, {"longest_empty_run", d.longest_empty_run}});
    } else if (o.op == "locate") {
        auto r = locate_exponent_point(m, flag_rational("beta", o.beta), o.depth);
        json rounds = json::array();
        for (const auto& rd : r.rounds)
            rounds.push_back({{"x", rd.x.str()},
                              {"r", rd.r.str()},
                              {"x_tilde", rd.xt.str()},
                              {"r_tilde", rd.rt.str()},
                              {"h_witness", io::fmt(rd.h_witness)},
                              {"p2", rd.p2},
                              {"p2_margin", io::fmt(rd.p2_margin)},
                              {"p3_ratio", io::fmt(rd.p3_ratio)}});
        io::write_json(o.out, {{"x", r.x.str()}, {"r", r.r.str()}, {"ordered", r.ordered}, {"rounds", rounds}});
    } else {
        throw FlagError("--op must be one of coarse-spectrum, local-exponent, maximal, trend, darboux, locate");
    }
    return kOk;
}

// ---- verify

struct VerifyOpts {
    std::string suite, in, out;
    unsigned j = 14;
};

int run_verify(const VerifyOpts& o)
{
    json doc = io::read_json(o.in);
    json rep = {{"suite", o.suite}};
    bool pass = false;
    if (o.suite == "affine-identities") {
        io::Model m = io::structural_model(doc);
        if (!m.affine) throw FlagError("affine-identities needs an affine input");
        auto r = check_affine_identities(*m.affine);
        json card = json::array();
        for (const auto& c : r.cardinality)
            card.push_back({{"n", c.n}, {"i", c.i}, {"count", c.count}, {"sandwich", c.sandwich}, {"eps", io::fmt(c.eps)}});
        rep.update({{"oscillations", r.oscillations},
                    {"oscillation_failures", r.oscillation_failures},
                    {"disjoint", r.disjoint},
                    {"sets_disjoint", r.sets_disjoint},
                    {"nested", r.nested},
                    {"monotone", r.monotone},
                    {"cardinality", card},
                    {"failures", r.failures}});
        pass = r.ok();
    } else if (o.suite == "spectrum-bound") {
        io::Model m = io::load_model(doc);
        auto s = coarse_spectrum(m, o.j, 20);
        double worst;
        pass = upper_bound_holds(s, &worst);
        rep["worst_excess"] = io::fmt(worst);
    } else if (o.suite == "monofractal") {
        io::Model m = io::structural_model(doc);
        if (!m.mono) throw FlagError("monofractal suite needs a mono input");
        auto c = check_sequences(m.mono->seq());
        std::size_t found = 0, tried = 0;
        for (unsigned n1 = 1; n1 <= std::min<std::size_t>(2, m.mono->seq().size()); ++n1)
            for (unsigned i = 0; i < 8; ++i, ++tried)
                if (check_flatness_defect(*m.mono, Rational(2 * i + 1, 16), n1).found) ++found;
        rep.update({{"sequences", c.ok}, {"failures", c.failures}, {"witnesses", found}, {"tried", tried}});
        pass = c.ok && found == tried;
    } else if (o.suite == "gap-invariants") {
        io::Model m = io::structural_model(doc);
        if (!m.gap) throw FlagError("gap-invariants needs a gap input");
        auto c = check_invariants(*m.gap);
        auto w = witness_search(*m.gap, 10);
        auto q = quadratic_flatness(*m.gap);
        rep.update({{"invariants", c.all()},
                    {"failures", c.failures},
                    {"witness_tested", w.tested},
                    {"witness_found", w.found},
                    {"quadratic_ok", q.ok},
                    {"quadratic_worst", io::fmt(q.worst)}});
        pass = c.all() && w.ok() && q.ok;
    } else if (o.suite == "hm-homogeneity") {
        io::Model m = io::structural_model(doc);
        if (!m.hm) throw FlagError("hm-homogeneity needs an hm input");
        unsigned pieces = m.recipe.value("pieces", 2u);
        bool diag = homogeneity_diagnostic(*m.hm, pieces), summ = amplitudes_summable(*m.hm);
        rep.update({{"diagnostic", diag}, {"summable", summ}, {"gap_halves", max_gap_halves(*m.hm)}});
        pass = diag && summ;
    } else {
        throw FlagError("--suite must be one of affine-identities, spectrum-bound, monofractal, gap-invariants, "
                        "hm-homogeneity");
    }
    rep["pass"] = pass;
    if (!o.out.empty()) io::write_json(o.out, rep);
    g_log.put({{"event", "verify"}, {"suite", o.suite}, {"pass", pass}});
    return pass ? kOk : kCheckFailed;
}

// --config FILE: keys (top level, or under the subcommand name) become flags unless given explicitly
std::vector<std::string> apply_config(std::vector<std::string> args)
{
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw FlagError("--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + long(i));
            break;
        }
    }
    if (path.empty()) return args;
    json cfg;
    try {
        cfg = io::read_json(path);
    } catch (const std::exception& e) {
        throw FlagError(std::string("--config: ") + e.what());
    }
    if (!cfg.is_object()) throw FlagError("--config: top level must be an object");
    std::string sub;
    for (const auto& a : args)
        if (a.rfind("-", 0) != 0) {
            sub = a;
            break;
        }
    json flat = json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!it.value().is_object()) flat[it.key()] = it.value();
    if (!sub.empty() && cfg.contains(sub) && cfg[sub].is_object())
        for (auto it = cfg[sub].begin(); it != cfg[sub].end(); ++it) flat[it.key()] = it.value();
    auto given = [&](const std::string& name) {
        for (const auto& a : args)
            if (a == name || a.rfind(name + "=", 0) == 0) return true;
        return false;
    };
    auto scalar = [](const json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    for (auto it = flat.begin(); it != flat.end(); ++it) {
        std::string name = "--" + it.key();
        if (given(name)) continue;
        const json& v = it.value();
        if (v.is_boolean()) {
            if (v.get<bool>()) args.push_back(name);
        } else if (v.is_array()) {
            for (const auto& e : v) {
                args.push_back(name);
                args.push_back(scalar(e));
            }
        } else {
            args.push_back(name);
            args.push_back(scalar(v));
        }
    }
    return args;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"multifractal constructions and checks"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_path;
    app.add_option("--log", log_path, "run log (JSON lines); stdout when absent");

    AffineOpts ao;
    auto* sa = app.add_subcommand("synth-affine", "affine-spectrum function");
    sa->add_option("--alpha0", ao.alpha0)->required();
    sa->add_option("--beta0", ao.beta0)->required();
    sa->add_option("--d", ao.d)->required();
    sa->add_option("--eta", ao.eta)->required();
    sa->add_option("--depth", ao.depth)->check(CLI::PositiveNumber);
    sa->add_option("--mode", ao.mode)->check(CLI::IsMember({"desk", "faithful"}));
    sa->add_option("--j", ao.j)->delimiter(',');
    sa->add_flag("--normalize", ao.normalize, "divide by Z(1)");
    sa->add_flag("--strict-budget", ao.strict_budget, "fail instead of writing an implicit document");
    sa->add_option("--breakpoint-budget", ao.breakpoint_budget);
    sa->add_option("--mark-budget", ao.mark_budget);
    sa->add_option("--out", ao.out)->required();

    std::vector<std::string> cin;
    std::string cout_path;
    std::size_t cbudget = default_breakpoint_budget();
    auto* sc = app.add_subcommand("synth-concat", "concatenation of scaled copies");
    sc->add_option("--in", cin)->required();
    sc->add_option("--out", cout_path)->required();
    sc->add_option("--breakpoint-budget", cbudget);

    HmOpts ho;
    auto* sh = app.add_subcommand("synth-hm", "homogeneous insertion build");
    sh->add_option("--family", ho.family, "JSON list of {support:[a,b], value:c}");
    sh->add_option("--piece", ho.piece, "lo,hi,value");
    sh->add_option("--affine-j", ho.cfg.affine_j);
    sh->add_option("--pieces", ho.cfg.pieces)->check(CLI::PositiveNumber);
    sh->add_option("--steps", ho.cfg.steps);
    sh->add_option("--mono-depth", ho.cfg.mono_depth)->check(CLI::PositiveNumber);
    sh->add_option("--amp-c", ho.cfg.amp_c);
    sh->add_flag("--exact-amplitude", ho.cfg.exact_amplitude);
    sh->add_option("--out", ho.out)->required();

    unsigned mono_n = 3, mono_bits = 4096;
    std::string mono_out;
    auto* sm = app.add_subcommand("synth-mono", "monofractal function");
    sm->add_option("--n", mono_n)->check(CLI::PositiveNumber);
    sm->add_option("--max-bits", mono_bits);
    sm->add_option("--out", mono_out)->required();

    GapOpts go;
    auto* sg = app.add_subcommand("synth-gap", "measure with spectrum support [0,1] and {2}");
    sg->add_option("--levels", go.cfg.levels)->check(CLI::PositiveNumber);
    sg->add_option("--blocks", go.cfg.tmpl.blocks)->check(CLI::PositiveNumber);
    sg->add_option("--micro-j", go.cfg.tmpl.micro_j)->check(CLI::PositiveNumber);
    sg->add_option("--weight-ratio", go.cfg.tmpl.weight_ratio);
    sg->add_option("--kappa-cap", go.cfg.kappa_cap_exp, "cap on log2 kappa, 0 for none");
    sg->add_option("--out", go.out)->required();

    WaveletOpts wo;
    auto* sw = app.add_subcommand("wavelet", "wavelet series built from a measure");
    sw->add_option("--in", wo.in)->required();
    sw->add_option("--alpha", wo.alpha);
    sw->add_option("--beta", wo.beta);
    sw->add_option("--basis", wo.basis);
    sw->add_option("--jmax", wo.jmax)->check(CLI::Range(2u, 20u));
    sw->add_option("--jmin", wo.jmin);
    sw->add_option("--window", wo.window);
    sw->add_option("--points", wo.points)->check(CLI::PositiveNumber);
    sw->add_option("--coeffs", wo.coeffs, "CSV j,k,d");
    sw->add_option("--signal", wo.signal, "CSV x,value");
    sw->add_option("--report", wo.report, "JSON transfer report");

    AnalyzeOpts an;
    auto* sz = app.add_subcommand("analyze", "estimators");
    sz->add_option("--in", an.in)->required();
    sz->add_option("--op", an.op)->required();
    sz->add_option("--out", an.out)->required();
    sz->add_option("--j", an.j);
    sz->add_option("--bins", an.bins)->check(CLI::PositiveNumber);
    sz->add_option("--h-max", an.h_max);
    sz->add_option("--lo", an.lo);
    sz->add_option("--hi", an.hi);
    sz->add_option("--jmin", an.jmin);
    sz->add_option("--jmax", an.jmax);
    sz->add_option("--window", an.window);
    sz->add_option("--x", an.x);
    sz->add_option("--grid", an.grid);
    sz->add_option("--beta", an.beta);
    sz->add_option("--g", an.g);
    sz->add_option("--t", an.t)->delimiter(',');
    sz->add_option("--depth", an.depth);

    VerifyOpts vo;
    auto* sv = app.add_subcommand("verify", "exact checks; exit 1 when any fails");
    sv->add_option("--suite", vo.suite)->required();
    sv->add_option("--in", vo.in)->required();
    sv->add_option("--out", vo.out);
    sv->add_option("--j", vo.j);

    try {
        if (const char* t = std::getenv("MF_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(t, &end, 10);
            if (end == t || *end != '\0' || v < 1) throw FlagError("MF_THREADS must be a positive integer");
            worker_limit() = unsigned(v);
        }
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kFlags;
    } catch (const FlagError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFlags;
    }

    try {
        g_log.open(log_path);
        if (*sa) return run_synth_affine(ao);
        if (*sc) return run_synth_concat(cin, cout_path, cbudget);
        if (*sh) return run_synth_hm(ho);
        if (*sm) return run_synth_mono(mono_n, mono_bits, mono_out);
        if (*sg) return run_synth_gap(go);
        if (*sw) return run_wavelet(wo);
        if (*sz) return run_analyze(an);
        if (*sv) return run_verify(vo);
    } catch (const FlagError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFlags;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const GapError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const LocatorError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const BudgetError& e) {
        std::cerr << "budget: " << e.what() << '\n';
        return kBudget;
    } catch (const std::overflow_error& e) {
        std::cerr << "budget: " << e.what() << '\n';
        return kBudget;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFlags;
    } catch (const io::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFlags;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCheckFailed;
    }
    return kOk;
}
