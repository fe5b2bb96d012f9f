#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "geomine/error.hpp"
#include "geomine/geo.hpp"
#include "oracles.hpp"
#include "test_common.hpp"

using namespace geomine;

namespace {

const Coordinate kMashhad{37.75888900, 45.97833300};
const Coordinate kTehran{37.55527800, 45.07250000};
const Coordinate kShiraz{35.84001880, 50.93909060};

Gazetteer chain() {
    std::istringstream in(
        "name,level,parent,lat,lon\n"
        "Mashhad,city,Razavi,36.26,59.61\n"
        "Razavi,province,Iran,36.0,59.0\n"
        "Iran,country,,32.4,53.7\n"
        "P.O. 123,office,Mashhad,36.27,59.62\n");
    return read_gazetteer(in);
}

} // namespace

TEST(Haversine, IdentityIsZero) {
    EXPECT_EQ(haversine_km(kMashhad, kMashhad), 0.0);
}

// Frozen from an independent Python haversine over the reference log rows.
TEST(Haversine, ReferenceLogPairs) {
    EXPECT_NEAR(haversine_km(kMashhad, kTehran), 82.89273822544274, 1e-9);
    EXPECT_NEAR(haversine_km(kTehran, kShiraz), 556.606398662964, 1e-9);
    EXPECT_NEAR(haversine_km(kMashhad, kTehran), 82.9, 0.1);
    EXPECT_NEAR(haversine_km(kTehran, kShiraz), 556.6, 0.5);
}

TEST(Haversine, SymmetricPositiveBounded) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
    for (int i = 0; i < 1000; ++i) {
        Coordinate a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
        EXPECT_EQ(haversine_km(a, b), haversine_km(b, a));
        EXPECT_GT(haversine_km(a, b), 0.0);
        EXPECT_LE(haversine_km(a, b), std::numbers::pi * kEarthRadiusKm);
    }
    EXPECT_NEAR(haversine_km({0, 0}, {0, 180}), std::numbers::pi * kEarthRadiusKm, 1e-9);
}

TEST(Haversine, AgreesWithVectorOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lat(-89, 89), lon(-179, 179);
    for (int i = 0; i < 200; ++i) {
        Coordinate a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
        const double ref = oracle::great_circle_km(a.lat, a.lon, b.lat, b.lon);
        EXPECT_NEAR(haversine_km(a, b), ref, 1e-9 * ref);
    }
}

TEST(Coordinate, ParseAndRange) {
    auto c = parse_lat_lon("37.75888900,45.97833300");
    ASSERT_TRUE(c);
    EXPECT_DOUBLE_EQ(c->lat, 37.758889);
    EXPECT_EQ(format_lat_lon(*c), "37.75888900,45.97833300");
    EXPECT_FALSE(parse_lat_lon("91.0,10.0"));
    EXPECT_FALSE(parse_lat_lon("10.0,181"));
    EXPECT_FALSE(parse_lat_lon("abc,1"));
    EXPECT_FALSE(parse_lat_lon("1.0"));
    EXPECT_THROW(Coordinate::make(std::nan(""), 0), ConfigError);
}

TEST(Gazetteer, ChainResolves) {
    auto g = chain();
    EXPECT_EQ(g.size(), 4u);
    const Place* mashhad = g.find("Mashhad", Level::city);
    ASSERT_NE(mashhad, nullptr);
    EXPECT_EQ(g.ancestor_at_level(mashhad->id, Level::country).name, "Iran");
    EXPECT_EQ(g.ancestor_at_level(mashhad->id, Level::province).name, "Razavi");
}

TEST(Gazetteer, AncestorAtLevel) {
    auto g = chain();
    const Place* office = g.find("P.O. 123", Level::office);
    ASSERT_NE(office, nullptr);
    EXPECT_EQ(g.ancestor_at_level(office->id, Level::city).name, "Mashhad");
    const Place* mashhad = g.find("Mashhad", Level::city);
    EXPECT_EQ(&g.ancestor_at_level(mashhad->id, Level::city), mashhad);
    try {
        g.ancestor_at_level(mashhad->id, Level::office);
        FAIL() << "expected HierarchyError";
    } catch (const HierarchyError& e) {
        EXPECT_NE(std::string(e.what()).find("finer than source level"), std::string::npos);
    }
}

TEST(Gazetteer, AncestorMonotone) {
    auto g = chain();
    for (const auto& p : g.places()) {
        if (p.level == Level::country) continue;
        const auto& prov = g.ancestor_at_level(p.id, Level::province);
        EXPECT_EQ(&g.ancestor_at_level(prov.id, Level::country), &g.ancestor_at_level(p.id, Level::country));
        EXPECT_EQ(&g.ancestor_at_level(prov.id, Level::province), &prov);
    }
}

TEST(Gazetteer, BrokenChain) {
    std::istringstream in("name,level,parent,lat,lon\nLonely,city,,1,1\n");
    auto g = read_gazetteer(in);
    EXPECT_THROW(g.ancestor_at_level(0, Level::country), HierarchyError);
}

TEST(Gazetteer, Errors) {
    std::istringstream dangling("name,level,parent,lat,lon\nMashhad,city,Nowhere,1,1\n");
    try {
        read_gazetteer(dangling);
        FAIL();
    } catch (const HierarchyError& e) {
        EXPECT_NE(std::string(e.what()).find("dangling"), std::string::npos);
    }
    std::istringstream dup("name,level,parent,lat,lon\nA,city,,1,1\nA,city,,2,2\n");
    EXPECT_THROW(read_gazetteer(dup), HierarchyError);
    std::istringstream inversion("name,level,parent,lat,lon\nP,province,C,1,1\nC,city,,2,2\n");
    try {
        read_gazetteer(inversion);
        FAIL();
    } catch (const HierarchyError& e) {
        EXPECT_NE(std::string(e.what()).find("inversion"), std::string::npos);
    }
    std::istringstream country_parent("name,level,parent,lat,lon\nX,country,,1,1\nY,country,X,1,1\n");
    EXPECT_THROW(read_gazetteer(country_parent), HierarchyError);
}

TEST(Gazetteer, EmptyFile) {
    std::istringstream empty("");
    auto g = read_gazetteer(empty);
    EXPECT_TRUE(g.empty());
    EXPECT_EQ(g.find("Mashhad", Level::city), nullptr);
    std::istringstream header_only("name,level,parent,lat,lon\n");
    EXPECT_TRUE(read_gazetteer(header_only).empty());
}

TEST(Gazetteer, LoadsFixture) {
    auto g = load_gazetteer(testing_support::data_path("reference_gazetteer.csv"));
    EXPECT_EQ(g.size(), 10u);
    // Same name at two levels resolves by level.
    EXPECT_NE(g.find("Tehran", Level::city), nullptr);
    EXPECT_NE(g.find("Tehran", Level::province), nullptr);
    EXPECT_THROW(load_gazetteer("/nonexistent.csv"), ConfigError);
}
