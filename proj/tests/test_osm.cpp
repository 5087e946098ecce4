#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "geopriv/common.hpp"
#include "geopriv/osm.hpp"

using namespace geopriv;

TEST_CASE("tagged node with house number becomes a feature") {
    std::string xml = R"(<?xml version="1.0"?>
<osm>
  <node id="42" lat="43.70" lon="-72.29">
    <tag k="building" v="dormitory"/>
    <tag k="addr:housenumber" v="10"/>
  </node>
</osm>)";
    osm::ParseStats stats;
    auto fs = osm::parse_osm(xml, &stats);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].feature_id == "n42");
    CHECK(fs[0].location_type == "dormitory");
    CHECK(fs[0].address_number == "10");
    CHECK(fs[0].lat == doctest::Approx(43.70));
    CHECK(stats.nodes_seen == 1);
    CHECK(stats.features_emitted == 1);
}

TEST_CASE("tag priority: amenity wins over shop and building") {
    std::string xml = R"(<osm>
  <node id="1" lat="1" lon="1">
    <tag k="building" v="yes"/>
    <tag k="shop" v="bakery"/>
    <tag k="amenity" v="cafe"/>
  </node>
</osm>)";
    auto fs = osm::parse_osm(xml);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].location_type == "cafe");
}

TEST_CASE("untagged nodes emit no feature but still anchor ways") {
    std::string xml = R"(<osm>
  <node id="1" lat="0" lon="0"/>
  <node id="2" lat="0" lon="2"/>
  <way id="9">
    <nd ref="1"/>
    <nd ref="2"/>
    <tag k="leisure" v="pitch"/>
  </way>
</osm>)";
    osm::ParseStats stats;
    auto fs = osm::parse_osm(xml, &stats);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].feature_id == "w9");
    CHECK(fs[0].location_type == "pitch");
    CHECK(fs[0].lat == doctest::Approx(0.0));   // centroid of member nodes
    CHECK(fs[0].lon == doctest::Approx(1.0));
    CHECK(stats.nodes_seen == 2);
    CHECK(stats.ways_seen == 1);
}

TEST_CASE("way referencing an unknown node is skipped and counted") {
    std::string xml = R"(<osm>
  <node id="1" lat="0" lon="0"/>
  <way id="9">
    <nd ref="1"/>
    <nd ref="404"/>
    <tag k="leisure" v="pitch"/>
  </way>
</osm>)";
    osm::ParseStats stats;
    auto fs = osm::parse_osm(xml, &stats);
    CHECK(fs.empty());
    CHECK(stats.ways_skipped_unknown_node == 1);
}

TEST_CASE("malformed xml reports the offending line") {
    std::string xml = "<osm>\n  <node id=\"1\" lat=\"0\" lon=\"0\">\n  <node id=\"2\" lat=\"0\" lon=\"0\"/>\n</osm>";
    try {
        osm::parse_osm(xml);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
    }
}

TEST_CASE("attribute entities are decoded") {
    std::string xml = R"(<osm>
  <node id="1" lat="1" lon="1">
    <tag k="amenity" v="fish &amp; chips"/>
  </node>
</osm>)";
    auto fs = osm::parse_osm(xml);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].location_type == "fish & chips");
}

TEST_CASE("coordinates out of range are rejected") {
    CHECK_THROWS_AS(osm::parse_osm(R"(<osm><node id="1" lat="99" lon="0"/></osm>)"), Error);
}
