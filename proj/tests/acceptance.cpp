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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace mf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// pinned tolerances
constexpr double kTrendSlack = 0.05;
constexpr double kMaximalBound = 5.0;
constexpr double kMonoMeanLo = 0.9, kMonoMeanHi = 1.1, kMonoMin = 0.8;
constexpr double kHmDistance = 0.15;
constexpr double kContrast = 0.15;
constexpr double kBetaTol = 0.1, kSlopeRel = 0.10, kInterceptTol = 0.05;
constexpr double kQuadratic = 4.0;
constexpr double kSpanLo = 0.3, kSpanHi = 1.0;
constexpr double kLocLo = 0.55, kLocHi = 0.85;
constexpr double kTime1 = 60, kTime4 = 30, kTime8 = 60;

// criteria whose failure is analyzed and expected at desk scale
const std::vector<int> kExpectedFailures{10};

const AffineParams kRef{Rational(2, 5), Rational(4, 5), Rational(3, 10), Rational(1, 2)};

struct Lebesgue {
    Rational operator()(const Dyadic& x) const
    {
        if (x.sign() < 0) return 0;
        if (x > Dyadic(1)) return 1;
        return x.to_rational();
    }
};

class Timer {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string num(double v, int prec = 4)
{
    char b[64];
    std::snprintf(b, sizeof b, "%.*f", prec, v);
    return b;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::shared_ptr<const AffineFunction> reference_affine()
{
    static auto z = std::make_shared<const AffineFunction>(make_affine(plan_levels(kRef, 2, Mode::desk, {20, 60})));
    return z;
}

// ---- 1

Outcome affine_identities()
{
    Timer t;
    auto z = reference_affine();
    auto r = check_affine_identities(*z);
    double secs = t.seconds();
    std::ostringstream d;
    d << r.oscillations << " oscillations, " << r.oscillation_failures << " wrong; disjoint=" << r.disjoint
      << " (" << r.pairs_brute << " pairs direct, rest by sweep); sets disjoint=" << r.sets_disjoint;
    for (const auto& c : r.cardinality)
        d << "; #T_" << c.n << "," << c.i << "=" << c.count << " E=" << c.expected.to_double()
          << " sandwich=" << c.sandwich << " eps=" << num(c.eps);
    d << "; " << num(secs, 1) << " s";
    return {r.ok() && secs < kTime1, d.str()};
}

// ---- 2

Outcome oscillation_trend_check()
{
    NormalizedAffine z(reference_affine());
    auto tr = oscillation_trend(z, 6, 14);
    double need = to_double(kRef.alpha0) - kTrendSlack;
    return {tr.slope >= need, "slope " + num(tr.slope) + " >= " + num(need)};
}

// ---- 3

struct Named {
    std::string name;
    std::function<Rational(const Dyadic&)> f;
};

std::vector<Named> constructed_functions()
{
    std::vector<Named> out;
    NormalizedAffine za(reference_affine());
    out.push_back({"affine", za});
    out.push_back({"affine+lebesgue", mix_with_lebesgue(za, Rational(1, 2))});
    auto hm = std::make_shared<const HmBuild>(
        build_hm({{{Rational(2, 5), Rational(4, 5), Rational(3, 20)}}}, HmConfig{}));
    out.push_back({"hm", [hm](const Dyadic& x) { return hm->f(x); }});
    auto mono = std::make_shared<const Monofractal>(gen_sequences(3));
    out.push_back({"mono", [mono](const Dyadic& x) { return (*mono)(x); }});
    GapConfig gc;
    auto gap = std::make_shared<const GapMeasure>(assemble_gap_function(gc));
    out.push_back({"gap", [gap](const Dyadic& x) { return NormalizedGap(*gap)(x); }});
    auto a = assemble(make_affine(plan_levels(kRef, 1, Mode::desk, {10})));
    auto b = assemble(make_affine(plan_levels({Rational(1, 5), Rational(2, 5), Rational(1, 10), Rational(1, 2)}, 1,
                                              Mode::desk, {10})));
    for (auto* f : {&a, &b}) {
        Rational tot = f->y.back();
        for (auto& v : f->y) v /= tot;
    }
    auto cc = std::make_shared<const PiecewiseAffine>(concatenate({&a, &b}));
    out.push_back({"concat", [cc](const Dyadic& x) { return (*cc)(x); }});
    return out;
}

Outcome spectrum_bound()
{
    bool ok = true;
    std::ostringstream d;
    for (const auto& n : constructed_functions()) {
        auto s = coarse_spectrum(n.f, 14, 20);
        double worst;
        bool b = upper_bound_holds(s, &worst);
        ok = ok && b;
        d << n.name << (b ? " ok" : " FAIL") << " (worst excess " << num(worst, 3) << "); ";
    }
    return {ok, d.str()};
}

// ---- 4

Outcome maximal_check()
{
    std::vector<Rational> ts{1, 2, 5, 10};
    std::vector<Rational> betas{Rational(1, 2), Rational(3, 4), Rational(1)};
    bool ok = true;
    std::ostringstream d;
    double worst = 0;
    // uniform: M*(x) = (2r)^{1-beta} with r the largest admissible dyadic radius
    Timer t1;
    bool oracle = true;
    for (const auto& b : betas) {
        auto m = maximal_function(Lebesgue{}, Dyadic(0), Dyadic(1), b, 14, ts);
        for (std::size_t i = 0; i < m.x.size(); ++i) {
            Rational x = m.x[i].to_rational(), dist = std::min(x, 1 - x), r(1, 2);
            while (r > dist) r /= 2;
            double want = (1 - to_double(b)) * log2r(2 * r);
            if (std::abs(m.log2_mstar[i] - want) > 1e-9) oracle = false;
        }
        for (double v : m.ratio) worst = std::max(worst, v);
    }
    double s1 = t1.seconds();
    Timer t2;
    NormalizedAffine z(reference_affine());
    double worst_a = 0;
    for (const auto& b : betas) {
        auto m = maximal_function(z, Dyadic(0), Dyadic(1), b, 14, ts);
        for (double v : m.ratio) worst_a = std::max(worst_a, v);
    }
    double s2 = t2.seconds();
    ok = oracle && worst <= kMaximalBound && worst_a <= kMaximalBound && s1 < kTime4 && s2 < kTime4;
    d << "uniform: closed form " << (oracle ? "matches" : "MISMATCH") << ", max ratio " << num(worst) << ", "
      << num(s1, 1) << " s; affine: max ratio " << num(worst_a) << ", " << num(s2, 1) << " s";
    return {ok, d.str()};
}

// ---- 5

Outcome monofractal_suite()
{
    Monofractal z(gen_sequences(3));
    auto c = check_sequences(z.seq());
    double sum = 0, lo = kInf;
    for (int i = 0; i < 64; ++i) {
        // scales between 1/b_2 and 1/b_3
        double h = local_exponent(z, Dyadic::make(2 * i + 1, 7), 20, 30);
        sum += h;
        lo = std::min(lo, h);
    }
    double mean = sum / 64;
    int found = 0;
    for (unsigned n1 : {1u, 2u})
        for (int i = 0; i < 8; ++i) found += check_flatness_defect(z, Rational(2 * i + 1, 16), n1).found;
    bool ok = c.ok && mean >= kMonoMeanLo && mean <= kMonoMeanHi && lo >= kMonoMin && found == 16;
    return {ok, std::string("inequalities ") + (c.ok ? "exact" : "FAIL") + "; mean " + num(mean) + ", min " +
                    num(lo) + "; witnesses " + std::to_string(found) + "/16"};
}

// ---- 6

Outcome hm_homogeneity()
{
    auto b = build_hm({{{Rational(2, 5), Rational(4, 5), Rational(3, 20)}}}, HmConfig{});
    std::vector<SpectrumEstimate> q;
    for (int i = 0; i < 4; ++i)
        q.push_back(coarse_spectrum(b.f, 12, 20, 2.0, Dyadic::make(i, 2), Dyadic::make(i + 1, 2)));
    double worst = 0;
    for (int i = 0; i < 4; ++i)
        for (int k = i + 1; k < 4; ++k) worst = std::max(worst, spectrum_distance(q[i], q[k]));
    auto dx = darboux_gap_check(coarse_spectrum(b.f, 12, 20));
    return {worst <= kHmDistance && dx.pass,
            "max quarter distance " + num(worst) + " (" + std::to_string(b.f.insertions.size()) +
                " insertions); darboux " + (dx.pass ? "pass" : "FAIL") + ", longest empty run " +
                std::to_string(dx.longest_empty_run)};
}

// ---- 7

Outcome contrast()
{
    auto a = assemble(make_affine(plan_levels(kRef, 1, Mode::desk, {10})));
    auto b = assemble(
        make_affine(plan_levels({Rational(1, 5), Rational(2, 5), Rational(1, 10), Rational(1, 2)}, 1, Mode::desk, {10})));
    for (auto* f : {&a, &b}) {
        Rational tot = f->y.back();
        for (auto& v : f->y) v /= tot;
    }
    auto c = concatenate({&a, &b});
    auto L = coarse_spectrum(c, 12, 20, 2.0, Dyadic(0), Dyadic::make(1, 1));
    auto R = coarse_spectrum(c, 12, 20, 2.0, Dyadic::make(1, 1), Dyadic(1));
    double d = spectrum_distance(L, R);
    return {d > kContrast, "left/right distance " + num(d)};
}

// ---- 8

Outcome wavelet_transfer()
{
    Timer t;
    Rational alpha(1, 2), beta(3, 2);
    const unsigned jmax = 12;
    // exact: mu(I_{j,k}) = 2^-j and -j alpha + (beta - alpha) log2 mu = -j beta
    auto c = measure_to_coeffs(Lebesgue{}, alpha, beta, jmax);
    bool exact = true;
    for (unsigned j = 1; j <= jmax; ++j)
        for (const auto& m : c.mu[j]) {
            Dyadic md;
            if (!Dyadic::from_rational(m, md) || !(md == Dyadic::pow2(-(long long)j))) exact = false;
            Rational e = -Rational(j) * alpha + (beta - alpha) * Rational(-(long long)j);
            if (e != -Rational(j) * beta) exact = false;
        }
    std::vector<Dyadic> pts;
    for (int i = 0; i < 16; ++i) pts.push_back(Dyadic::make(2 * i + 1, 5));
    auto leb = transfer_check(Lebesgue{}, alpha, beta, pts, "haar", jmax);
    double dev = 0;
    for (const auto& r : leb.rows) dev = std::max(dev, std::abs(r.h_out - to_double(beta)));

    auto z = std::make_shared<const AffineFunction>(make_affine(plan_levels(kRef, 1, Mode::desk, {8})));
    NormalizedAffine za(z);
    std::vector<Dyadic> p2;
    const auto& ks = z->sets().marks[0];
    for (std::size_t i = 0; i < 8; ++i)
        p2.push_back(Dyadic::make(to_int(ks[i * ks.size() / 8]) + 1, 8) - Dyadic::pow2(-20));
    for (int k = 1, n = 0; n < 8; k += 37)
        if (z->find_mark(1, u128(k % 255)) < 0) {
            p2.push_back(Dyadic::make(2 * (k % 255) + 1, 9));
            ++n;
        }
    auto aff = transfer_check(za, alpha, beta, p2, "haar", jmax);
    double secs = t.seconds();
    double want_s = to_double(beta - alpha), want_i = to_double(alpha);
    bool ok = exact && dev <= kBetaTol && std::abs(aff.fit.slope - want_s) <= kSlopeRel * want_s &&
              std::abs(aff.fit.intercept - want_i) <= kInterceptTol && secs < kTime8;
    return {ok, std::string("lebesgue coefficients ") + (exact ? "exact" : "WRONG") + ", max |h-beta| " + num(dev) +
                    "; affine fit slope " + num(aff.fit.slope) + " intercept " + num(aff.fit.intercept) + "; " +
                    num(secs, 1) + " s"};
}

// ---- 9

Outcome gap_suite()
{
    GapConfig cfg;
    cfg.levels = 3;
    auto g = assemble_gap_function(cfg);
    auto c = check_invariants(g);
    auto w = witness_search(g, 10);
    auto q = quadratic_flatness(g);
    auto s = coarse_spectrum(NormalizedGap(g), 12, 20);
    long lo = -1, hi = -1;
    for (std::size_t b = 0; b < s.unit_bins(); ++b)
        if (s.counts[b]) {
            if (lo < 0) lo = long(b);
            hi = long(b);
        }
    bool span = lo >= 0 && s.lower(std::size_t(lo)) <= kSpanLo + 1e-12 && s.upper(std::size_t(hi)) >= kSpanHi - 1e-12;
    bool ok = c.all() && w.ok() && q.ok && q.worst <= kQuadratic && span;
    std::ostringstream d;
    d << "invariants " << (c.all() ? "exact" : "FAIL") << "; witnesses " << w.found << "/" << w.tested
      << "; quadratic worst " << num(q.worst) << " over " << q.tested << "; occupied bins";
    if (lo >= 0) d << " [" << num(s.lower(std::size_t(lo)), 1) << ", " << num(s.upper(std::size_t(hi)), 1) << ")";
    else d << " none";
    return {ok, d.str()};
}

// ---- 10

Outcome locator()
{
    auto z = reference_affine();
    NormalizedAffine za(z);
    auto mixed = mix_with_lebesgue(za, Rational(1, 2));
    Rational beta(7, 10);
    LocatorConfig cfg;
    cfg.seed_gen = 22;
    std::ostringstream d;
    bool ok = false;
    try {
        auto r = locate_exponent_point(mixed, beta, 4, cfg);
        double h = local_exponent(mixed, r.x, r.rounds.front().g, r.g, r.g - r.rounds.front().g + 1);
        ok = r.ordered && h >= kLocLo && h <= kLocHi;
        d << "depth 4: exponent " << num(h) << ", ordered " << r.ordered;
    } catch (const LocatorError& e) {
        d << "depth 4: " << e.what();
    }
    try {
        auto r = locate_exponent_point(mixed, beta, 1, cfg);
        unsigned g0 = r.rounds.front().g;
        double h = local_exponent(mixed, r.x, g0, r.g, r.g - g0 + 1);
        d << "; depth 1: exponent " << num(h) << " over radii 2^-" << g0 << "..2^-" << r.g << ", ordered "
          << r.ordered;
    } catch (const LocatorError& e) {
        d << "; depth 1: " << e.what();
    }
    return {ok, d.str()};
}

// ---- 11

int shell(const std::string& cmd)
{
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism(const std::string& cli, const fs::path& out)
{
    if (cli.empty()) return {false, "no --cli given"};
    const std::string small = "synth-affine --alpha0 2/5 --beta0 4/5 --d 3/10 --eta 1/2 --depth 2 --j 8,24";
    // each entry: artifact names, then argument template with {} for the run directory
    std::vector<std::pair<std::vector<std::string>, std::string>> steps{
        {{"affine.json", "affine.log"}, small + " --normalize --out {}/affine.json --log {}/affine.log"},
        {{"ref.json", "ref.log"},
         "synth-affine --alpha0 2/5 --beta0 4/5 --d 3/10 --eta 1/2 --depth 2 --j 20,60 --out {}/ref.json --log "
         "{}/ref.log"},
        {{"other.json"},
         "synth-affine --alpha0 1/5 --beta0 2/5 --d 1/10 --eta 1/2 --depth 1 --j 10 --out {}/other.json --log "
         "{}/other.log"},
        {{"concat.json", "concat.log"},
         "synth-concat --in {}/affine.json --in {}/other.json --out {}/concat.json --log {}/concat.log"},
        {{"hm.json", "hm.log"}, "synth-hm --piece 2/5,4/5,3/20 --out {}/hm.json --log {}/hm.log"},
        {{"mono.json", "mono.log"}, "synth-mono --n 3 --out {}/mono.json --log {}/mono.log"},
        {{"gap.json", "gap.log"}, "synth-gap --levels 2 --out {}/gap.json --log {}/gap.log"},
        {{"coeffs.csv", "signal.csv", "wavelet.json", "wavelet.log"},
         "wavelet --in {}/affine.json --jmax 10 --coeffs {}/coeffs.csv --signal {}/signal.csv --report "
         "{}/wavelet.json --log {}/wavelet.log"},
        {{"spectrum.csv"}, "analyze --in {}/hm.json --op coarse-spectrum --j 12 --out {}/spectrum.csv --log {}/a1.log"},
        {{"exponents.csv"},
         "analyze --in {}/mono.json --op local-exponent --grid 5 --jmin 20 --jmax 30 --out {}/exponents.csv --log "
         "{}/a2.log"},
        {{"maximal.csv"}, "analyze --in {}/affine.json --op maximal --g 12 --out {}/maximal.csv --log {}/a3.log"},
        {{"trend.csv"}, "analyze --in {}/affine.json --op trend --jmin 6 --jmax 14 --out {}/trend.csv --log {}/a4.log"},
        {{"darboux.json"}, "analyze --in {}/gap.json --op darboux --j 12 --out {}/darboux.json --log {}/a5.log"},
        {{"locate.json"},
         "analyze --in {}/mix.json --op locate --beta 7/10 --depth 0 --out {}/locate.json --log {}/a6.log"},
        {{"v1.json"}, "verify --suite affine-identities --in {}/affine.json --out {}/v1.json --log {}/v.log"},
        {{"v2.json"}, "verify --suite spectrum-bound --in {}/affine.json --j 12 --out {}/v2.json --log {}/v.log"},
        {{"v3.json"}, "verify --suite monofractal --in {}/mono.json --out {}/v3.json --log {}/v.log"},
        {{"v4.json"}, "verify --suite gap-invariants --in {}/gap.json --out {}/v4.json --log {}/v.log"},
        {{"v5.json", "v.log"}, "verify --suite hm-homogeneity --in {}/hm.json --out {}/v5.json --log {}/v.log"},
    };
    std::vector<std::string> failures;
    std::size_t compared = 0;
    for (const char* run : {"run1", "run2"}) {
        fs::path dir = out / run;
        fs::remove_all(dir);
        fs::create_directories(dir);
        // mixed measure input for the locator, written by hand
        json mix = io::implicit_json(
            {{"kind", "mix"},
             {"weight", "1/2"},
             {"base", io::affine_recipe(kRef, 2, Mode::desk, {8, 24}, true)}},
            json::object(), "mixed measure");
        io::write_json((dir / "mix.json").string(), mix);
        for (const auto& [files, tmpl] : steps) {
            std::string args = tmpl;
            for (std::size_t p; (p = args.find("{}")) != std::string::npos;) args.replace(p, 2, dir.string());
            int rc = shell(cli + " " + args + " >>" + (dir / "stdout.txt").string() + " 2>&1");
            if (rc != 0) failures.push_back(std::string(run) + ": exit " + std::to_string(rc) + " for " +
                                            args.substr(0, args.find(' ')));
        }
    }
    for (const auto& [files, tmpl] : steps)
        for (const auto& f : files) {
            ++compared;
            if (!fs::exists(out / "run1" / f)) failures.push_back(f + " missing");
            else if (slurp(out / "run1" / f) != slurp(out / "run2" / f)) failures.push_back(f + " differs");
        }
    // worker count must not change the bytes
    fs::path dir = out / "run1";
    std::string a = (dir / "spectrum_mt.csv").string();
    if (shell("MF_THREADS=4 " + cli + " analyze --in " + (dir / "hm.json").string() +
              " --op coarse-spectrum --j 12 --out " + a + " >/dev/null 2>&1") != 0 ||
        slurp(a) != slurp(dir / "spectrum.csv"))
        failures.push_back("spectrum.csv differs under MF_THREADS=4");
    ++compared;
    std::string d = std::to_string(compared) + " artifacts compared";
    if (!failures.empty()) d += "; " + failures.front() + (failures.size() > 1 ? " (+more)" : "");
    return {failures.empty(), d};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::string out = "acceptance_out", cli;
    std::vector<int> only;
    app.add_option("--out", out, "artifact directory");
    app.add_option("--cli", cli, "path of the command-line tool");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(out);

    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"affine identities", affine_identities},
        {"oscillation trend", oscillation_trend_check},
        {"coarse-spectrum upper bound", spectrum_bound},
        {"maximal inequality", maximal_check},
        {"monofractal suite", monofractal_suite},
        {"hm homogeneity", hm_homogeneity},
        {"non-hm contrast", contrast},
        {"wavelet transfer", wavelet_transfer},
        {"gap-measure suite", gap_suite},
        {"singularity locator", locator},
        {"determinism", [&] { return determinism(cli, fs::path(out)); }},
    };

    int unexpected = 0, passed = 0, ran = 0;
    json report = json::array();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        int id = int(i + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        ++ran;
        Timer t;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        bool expected = std::find(kExpectedFailures.begin(), kExpectedFailures.end(), id) != kExpectedFailures.end();
        if (o.pass) ++passed;
        else if (!expected) ++unexpected;
        std::cout << "[" << (o.pass ? "PASS" : "FAIL") << "] " << id << ". " << criteria[i].first << ": " << o.detail
                  << (o.pass || !expected ? "" : " (expected at desk scale)") << " [" << num(t.seconds(), 1) << " s]"
                  << std::endl;
        report.push_back({{"criterion", id}, {"name", criteria[i].first}, {"pass", o.pass}, {"detail", o.detail}});
    }
    io::write_json((fs::path(out) / "acceptance.json").string(), report);
    std::cout << passed << "/" << ran << " criteria pass";
    if (unexpected) std::cout << ", " << unexpected << " unexpected failure(s)";
    std::cout << std::endl;
    return unexpected ? 1 : 0;
}
