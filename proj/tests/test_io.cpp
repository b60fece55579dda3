#include "mf/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace mf;
using nlohmann::json;

namespace {

json small_affine_recipe(bool normalize = false)
{
    AffineParams p{Rational(2, 5), Rational(4, 5), Rational(3, 10), Rational(1, 2)};
    return io::affine_recipe(p, 2, Mode::desk, {8, 24}, normalize);
}

}  // namespace

TEST(Io, Fmt)
{
    EXPECT_EQ(io::fmt(0.5), "0.5");
    EXPECT_EQ(io::fmt(1.0 / 3), "0.3333333333");
    EXPECT_EQ(io::fmt(kInf), "inf");
    EXPECT_EQ(io::fmt(-kInf), "-inf");
}

TEST(Io, RationalFields)
{
    EXPECT_EQ(io::rat(json("3/10")), Rational(3, 10));
    EXPECT_EQ(io::rat(json(4)), Rational(4));
    EXPECT_THROW(io::rat(json(0.3)), io::FormatError);
}

TEST(Io, FunctionRoundTrip)
{
    io::Model m = io::build_model(small_affine_recipe());
    auto f = assemble(*m.affine);
    f.provenance = {{"kind", "affine"}};
    json doc = io::function_json(f, m.recipe);
    auto g = io::function_from_json(json::parse(doc.dump()));
    EXPECT_EQ(g.x, f.x);
    EXPECT_EQ(g.y, f.y);
    EXPECT_EQ(g.provenance, f.provenance);
}

TEST(Io, FunctionRejectsBadDocuments)
{
    EXPECT_THROW(io::function_from_json(json::object()), io::FormatError);
    json one = {{"breakpoints", {{{"x", "0"}, {"y", "0"}}}}};
    EXPECT_THROW(io::function_from_json(one), std::invalid_argument);
}

TEST(Io, FamilyRoundTrip)
{
    FamilySpectrum f{{{Rational(2, 5), Rational(4, 5), Rational(3, 20)}, {Rational(1, 2), Rational(1, 2), Rational(0)}}};
    auto g = io::family_from_json(io::family_to_json(f));
    ASSERT_EQ(g.pieces.size(), 2u);
    EXPECT_EQ(g.pieces[0].value, Rational(3, 20));
    EXPECT_EQ(g.pieces[1].lo, Rational(1, 2));
}

TEST(Io, ModelsFromRecipes)
{
    io::Model a = io::build_model(small_affine_recipe(true));
    EXPECT_EQ(a.kind(), "affine");
    EXPECT_EQ(a(Dyadic(1)), 1);
    io::Model mono = io::build_model({{"kind", "mono"}, {"n", 2}});
    EXPECT_TRUE(mono.mono);
    EXPECT_EQ(mono(Dyadic(1)), mono.mono->Z(1));
    io::Model mix = io::build_model({{"kind", "mix"}, {"weight", "1/2"}, {"base", small_affine_recipe(true)}});
    EXPECT_EQ(mix(Dyadic::make(1, 1)), a(Dyadic::make(1, 1)) / 2 + Rational(1, 4));
    EXPECT_THROW(io::build_model({{"kind", "spline"}}), io::FormatError);
    EXPECT_THROW(io::build_model({{"kind", "mix"}, {"weight", "2"}, {"base", small_affine_recipe()}}),
                 std::invalid_argument);
}

TEST(Io, ConcatRecipeNormalizesParts)
{
    json r = {{"kind", "concat"}, {"parts", {small_affine_recipe(), small_affine_recipe(true)}}};
    io::Model m = io::build_model(r);
    ASSERT_TRUE(m.pwa);
    EXPECT_EQ(m(Dyadic(1)), Rational(3, 4));
    EXPECT_EQ(m(Dyadic::make(1, 2)), 0);
    EXPECT_EQ(m(Dyadic::make(1, 1)), Rational(1, 4));
}

TEST(Io, LoadExplicitKeepsRecipe)
{
    io::Model m = io::build_model(small_affine_recipe());
    auto f = assemble(*m.affine);
    json doc = io::function_json(f, m.recipe);
    io::Model e = io::load_model(doc);
    EXPECT_TRUE(e.pwa);
    EXPECT_FALSE(e.affine);
    EXPECT_TRUE(e.recipe.at("explicit").get<bool>());
    io::Model s = io::structural_model(doc);
    EXPECT_TRUE(s.affine);
    EXPECT_EQ(e(Dyadic::make(77, 8)), s(Dyadic::make(77, 8)));
    EXPECT_THROW(io::load_model(json::object()), io::FormatError);
    EXPECT_THROW(io::structural_model(io::function_json(f, json())), io::FormatError);
}

TEST(Io, ImplicitDocumentRebuilds)
{
    json doc = io::implicit_json({{"kind", "mono"}, {"n", 2}}, json::object(), "not dyadic");
    io::Model m = io::load_model(doc);
    EXPECT_TRUE(m.mono);
    EXPECT_TRUE(doc.at("implicit").get<bool>());
}

TEST(Io, FilesAndCsv)
{
    auto dir = std::filesystem::temp_directory_path() / "mf_io_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "a.json").string();
    io::write_json(path, {{"k", 1}});
    EXPECT_EQ(io::read_json(path).at("k"), 1);
    std::ofstream(dir / "bad.json") << "{";
    EXPECT_THROW(io::read_json((dir / "bad.json").string()), io::FormatError);
    EXPECT_THROW(io::read_json((dir / "none.json").string()), io::FormatError);

    auto s = spectrum_from_values({0, Rational(1, 16), Rational(1, 8)}, 4, 4, 2.0);
    std::string csv = io::spectrum_csv(s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "h_bin_center,count,dim_estimate,generation");
    EXPECT_NE(csv.find("1.25,2,0.25,4"), std::string::npos);
    EXPECT_EQ(io::signal_csv({1.0, 2.0}), "x,value\n0,1\n0.5,2\n");
}
