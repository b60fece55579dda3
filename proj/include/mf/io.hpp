#pragma once

#include "mf/affine.hpp"
#include "mf/analysis.hpp"
#include "mf/dyadic.hpp"
#include "mf/gap.hpp"
#include "mf/hm.hpp"
#include "mf/measure_ops.hpp"
#include "mf/monofractal.hpp"
#include "mf/pwa.hpp"
#include "mf/spectra.hpp"
#include "mf/wavelet.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mf::io {

using nlohmann::json;

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fmt(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline Rational rat(const json& j)
{
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    throw FormatError("expected a rational string, got " + j.dump());
}

// ---- function documents

inline json plan_report(const LevelPlan& p)
{
    json levels = json::array();
    for (const auto& L : p.levels) {
        json used = json::array();
        for (unsigned i : L.used)
            used.push_back({{"i", i},
                            {"alpha", rstr(L.alpha[i])},
                            {"gamma", rstr(L.gamma[i])},
                            {"m", L.m[i]},
                            {"spacing", L.spacing[i]}});
        levels.push_back({{"n", L.n}, {"J", L.J}, {"marks", used}});
    }
    return {{"mode", p.mode == Mode::desk ? "desk" : "faithful"},
            {"eps0", rstr(p.eps0)},
            {"levels", levels},
            {"violations", p.violations},
            {"substitutions", p.substitutions}};
}

inline json function_json(const PiecewiseAffine& f, const json& recipe)
{
    json bp = json::array();
    for (std::size_t i = 0; i < f.size(); ++i) bp.push_back({{"x", f.x[i].str()}, {"y", rstr(f.y[i])}});
    return {{"breakpoints", std::move(bp)}, {"provenance", f.provenance}, {"recipe", recipe}};
}

inline json implicit_json(const json& recipe, const json& provenance, const std::string& reason)
{
    return {{"implicit", true}, {"reason", reason}, {"provenance", provenance}, {"recipe", recipe}};
}

inline PiecewiseAffine function_from_json(const json& j)
{
    if (!j.contains("breakpoints")) throw FormatError("document has no breakpoints");
    PiecewiseAffine f;
    for (const auto& b : j.at("breakpoints")) {
        f.x.push_back(Dyadic::parse(b.at("x").get<std::string>()));
        f.y.push_back(parse_rational(b.at("y").get<std::string>()));
    }
    f.check_shape();
    if (j.contains("provenance")) f.provenance = j.at("provenance");
    return f;
}

// ---- recipes: every construction is rebuilt deterministically from its recipe

struct Model {
    json recipe;
    json provenance = json::object();
    std::function<Rational(const Dyadic&)> eval;
    std::shared_ptr<const AffineFunction> affine;
    std::shared_ptr<const PiecewiseAffine> pwa;
    std::shared_ptr<const HmBuild> hm;
    std::shared_ptr<const Monofractal> mono;
    std::shared_ptr<const GapMeasure> gap;
    std::vector<std::string> deviations;

    Rational operator()(const Dyadic& x) const { return eval(x); }
    std::string kind() const { return recipe.value("kind", std::string("explicit")); }
};

inline json affine_recipe(const AffineParams& p, unsigned depth, Mode mode, const std::vector<unsigned>& js,
                          bool normalize)
{
    return {{"kind", "affine"},
            {"alpha0", rstr(p.alpha0)},
            {"beta0", rstr(p.beta0)},
            {"d", rstr(p.d)},
            {"eta", rstr(p.eta)},
            {"depth", depth},
            {"mode", mode == Mode::desk ? "desk" : "faithful"},
            {"j", js},
            {"normalize", normalize}};
}

inline FamilySpectrum family_from_json(const json& j)
{
    FamilySpectrum f;
    for (const auto& p : j) {
        const auto& s = p.at("support");
        f.pieces.push_back({rat(s.at(0)), rat(s.at(1)), rat(p.at("value"))});
    }
    return f;
}

inline json family_to_json(const FamilySpectrum& f)
{
    json a = json::array();
    for (const auto& p : f.pieces) a.push_back({{"support", {rstr(p.lo), rstr(p.hi)}}, {"value", rstr(p.value)}});
    return a;
}

inline Model build_model(const json& recipe, std::size_t mark_budget = default_mark_budget());

namespace detail {

inline Model affine_model(const json& r, std::size_t budget)
{
    AffineParams p{rat(r.at("alpha0")), rat(r.at("beta0")), rat(r.at("d")), rat(r.at("eta"))};
    Mode mode = r.value("mode", std::string("desk")) == "faithful" ? Mode::faithful : Mode::desk;
    auto js = r.value("j", std::vector<unsigned>{});
    auto plan = plan_levels(p, r.at("depth").get<unsigned>(), mode, js);
    auto z = std::make_shared<const AffineFunction>(make_affine(plan, budget));
    Model m;
    m.recipe = r;
    m.affine = z;
    m.provenance = {{"kind", "affine"}, {"plan", plan_report(plan)}};
    m.deviations = plan.violations;
    if (r.value("normalize", false)) {
        NormalizedAffine na(z);
        m.eval = [na](const Dyadic& x) { return na(x); };
    } else {
        m.eval = [z](const Dyadic& x) { return (*z)(x).to_rational(); };
    }
    return m;
}

// explicit breakpoints of a model, normalized to map [0,1] onto [0,1]
inline PiecewiseAffine explicit_unit(const Model& m, std::size_t breakpoint_budget)
{
    PiecewiseAffine f;
    if (m.pwa) f = *m.pwa;
    else if (m.affine) f = assemble(*m.affine, breakpoint_budget);
    else throw FormatError("input of kind '" + m.kind() + "' has no explicit form");
    f.x.front() = Dyadic(0);
    Rational lo = f.y.front(), hi = f.y.back();
    if (!(hi > lo)) throw FormatError("input carries no mass");
    for (auto& v : f.y) v = (v - lo) / (hi - lo);
    f.provenance = m.provenance;
    return f;
}

}  // namespace detail

inline Model build_model(const json& r, std::size_t budget)
{
    std::string kind = r.value("kind", std::string("explicit"));
    if (kind == "affine") return detail::affine_model(r, budget);
    if (kind == "explicit") {
        auto f = std::make_shared<const PiecewiseAffine>(function_from_json(r.at("document")));
        Model m;
        m.recipe = r;
        m.pwa = f;
        m.provenance = f->provenance;
        m.eval = [f](const Dyadic& x) { return (*f)(x); };
        return m;
    }
    if (kind == "concat") {
        std::vector<PiecewiseAffine> parts;
        for (const auto& p : r.at("parts"))
            parts.push_back(detail::explicit_unit(build_model(p, budget), r.value("breakpoint_budget",
                                                                                  default_breakpoint_budget())));
        std::vector<const PiecewiseAffine*> ptr;
        for (auto& p : parts) ptr.push_back(&p);
        auto f = std::make_shared<const PiecewiseAffine>(concatenate(ptr));
        Model m;
        m.recipe = r;
        m.pwa = f;
        m.provenance = f->provenance;
        m.eval = [f](const Dyadic& x) { return (*f)(x); };
        return m;
    }
    if (kind == "mix") {
        Model base = build_model(r.at("base"), budget);
        Rational w = rat(r.at("weight"));
        if (!(w > 0 && w < 1)) throw std::invalid_argument("weight must lie in (0,1)");
        Model m = base;
        m.recipe = r;
        m.provenance = {{"kind", "mix"}, {"weight", rstr(w)}, {"base", base.provenance}};
        auto inner = base.eval;
        m.eval = [inner, w](const Dyadic& x) {
            Dyadic c = x.sign() < 0 ? Dyadic(0) : (x > Dyadic(1) ? Dyadic(1) : x);
            return w * inner(x) + (1 - w) * c.to_rational();
        };
        if (base.pwa) {
            auto f = std::make_shared<const PiecewiseAffine>(mix_with_lebesgue(*base.pwa, w));
            m.pwa = f;
        }
        return m;
    }
    if (kind == "hm") {
        HmConfig c;
        c.affine_j = r.value("affine_j", c.affine_j);
        c.pieces = r.value("pieces", c.pieces);
        c.steps = r.value("steps", c.steps);
        c.mono_depth = r.value("mono_depth", c.mono_depth);
        c.amp_c = r.value("amp_c", c.amp_c);
        c.exact_amplitude = r.value("exact_amplitude", c.exact_amplitude);
        auto b = std::make_shared<const HmBuild>(build_hm(family_from_json(r.at("family")), c));
        Model m;
        m.recipe = r;
        m.hm = b;
        m.deviations = b->deviations;
        m.provenance = {{"kind", "hm"}, {"insertions", b->f.insertions.size()}};
        m.eval = [b](const Dyadic& x) { return b->f(x); };
        return m;
    }
    if (kind == "mono") {
        auto z = std::make_shared<const Monofractal>(gen_sequences(r.at("n").get<unsigned>()));
        Model m;
        m.recipe = r;
        m.mono = z;
        m.provenance = {{"kind", "mono"}};
        m.eval = [z](const Dyadic& x) { return (*z)(x); };
        return m;
    }
    if (kind == "gap") {
        GapConfig c;
        c.levels = r.value("levels", c.levels);
        c.tmpl.blocks = r.value("blocks", c.tmpl.blocks);
        c.tmpl.micro_j = r.value("micro_j", c.tmpl.micro_j);
        c.tmpl.weight_ratio = r.value("weight_ratio", c.tmpl.weight_ratio);
        c.kappa_cap_exp = r.value("kappa_cap_exp", c.kappa_cap_exp);
        auto g = std::make_shared<const GapMeasure>(assemble_gap_function(c));
        Model m;
        m.recipe = r;
        m.gap = g;
        m.provenance = {{"kind", "gap"}, {"levels", g->levels.size()}};
        m.eval = [g](const Dyadic& x) { return (*g)(x); };
        return m;
    }
    throw FormatError("unknown recipe kind '" + kind + "'");
}

// document -> model: explicit documents keep their breakpoints, implicit ones are rebuilt
inline Model load_model(const json& doc, std::size_t budget = default_mark_budget())
{
    if (doc.contains("breakpoints")) {
        json r = {{"kind", "explicit"}, {"document", doc}};
        Model m = build_model(r, budget);
        if (doc.contains("recipe")) {
            m.recipe = doc.at("recipe");
            m.recipe["explicit"] = true;
        }
        return m;
    }
    if (!doc.contains("recipe")) throw FormatError("document has neither breakpoints nor a recipe");
    return build_model(doc.at("recipe"), budget);
}

// recipe of a document with the structure needed by the verify suites
inline Model structural_model(const json& doc, std::size_t budget = default_mark_budget())
{
    if (!doc.contains("recipe") || !doc.at("recipe").is_object()) throw FormatError("document carries no recipe");
    json r = doc.at("recipe");
    r.erase("explicit");
    return build_model(r, budget);
}

inline json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

// ---- CSV

inline std::string spectrum_csv(const SpectrumEstimate& s)
{
    std::ostringstream o;
    o << "h_bin_center,count,dim_estimate,generation\n";
    for (std::size_t b = 0; b < s.bins; ++b)
        o << fmt(s.center(b)) << ',' << s.counts[b] << ',' << fmt(s.estimate(b)) << ',' << s.j << '\n';
    return o.str();
}

// two gnuplot blocks: profile, then the threshold table
inline std::string maximal_csv(const MaximalProfile& m)
{
    std::ostringstream o;
    o << "x,Mstar\n";
    for (std::size_t i = 0; i < m.x.size(); ++i)
        o << fmt(m.x[i].to_double()) << ',' << fmt(std::isinf(m.log2_mstar[i]) ? 0.0 : std::exp2(m.log2_mstar[i]))
          << '\n';
    o << "\n\nt,lambda,bound,margin\n";
    for (std::size_t t = 0; t < m.thresholds.size(); ++t)
        o << fmt(m.thresholds[t]) << ',' << fmt(m.lambda[t]) << ",5," << fmt(m.ratio[t]) << '\n';
    return o.str();
}

inline std::string coefficients_csv(const CoefficientArray& c)
{
    std::ostringstream o;
    o << "j,k,d\n";
    for (unsigned j = 1; j <= c.jmax; ++j)
        for (std::size_t k = 0; k < c.d[j].size(); ++k) o << j << ',' << k << ',' << fmt(c.d[j][k]) << '\n';
    return o.str();
}

inline std::string signal_csv(const std::vector<double>& s)
{
    std::ostringstream o;
    o << "x,value\n";
    double n = double(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) o << fmt(double(i) / n) << ',' << fmt(s[i]) << '\n';
    return o.str();
}

}  // namespace mf::io
