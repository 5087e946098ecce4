#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "geopriv/common.hpp"
#include "geopriv/geo.hpp"

namespace geopriv {
namespace osm {

// Tag keys that may supply a location type, highest priority first.
inline const std::vector<std::string>& type_tag_priority() {
    static const std::vector<std::string> keys = {
        "amenity", "shop", "leisure", "tourism", "office", "building", "highway", "landuse"};
    return keys;
}

struct ParseStats {
    std::size_t nodes_seen = 0;
    std::size_t ways_seen = 0;
    std::size_t features_emitted = 0;
    std::size_t ways_skipped_unknown_node = 0;
};

namespace detail {

struct Element {
    std::string name;
    std::unordered_map<std::string, std::string> attrs;
    bool self_closing = false;
    bool closing = false;  // </name>
};

inline std::string decode_entities(const std::string& s) {
    if (s.find('&') == std::string::npos) return s;
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        if (s.compare(i, 5, "&amp;") == 0) { out.push_back('&'); i += 4; }
        else if (s.compare(i, 4, "&lt;") == 0) { out.push_back('<'); i += 3; }
        else if (s.compare(i, 4, "&gt;") == 0) { out.push_back('>'); i += 3; }
        else if (s.compare(i, 6, "&quot;") == 0) { out.push_back('"'); i += 5; }
        else if (s.compare(i, 6, "&apos;") == 0) { out.push_back('\''); i += 5; }
        else out.push_back(s[i]);
    }
    return out;
}

// Minimal XML tokenizer: enough for the OSM node/way/tag/nd subset.
// Tracks line numbers so malformed input produces a locatable error.
class Scanner {
public:
    explicit Scanner(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error("XML parse error at line " + std::to_string(line_) + ": " + msg);
    }

    // Advance to the next element tag; false at end of input.
    bool next(Element& el) {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') ++line_;
            if (c == '<') break;
            ++pos_;
        }
        if (pos_ >= text_.size()) return false;
        ++pos_;  // consume '<'
        if (pos_ < text_.size() && text_[pos_] == '?') {  // <?xml ... ?>
            skip_until('>');
            return next(el);
        }
        if (text_.compare(pos_, 3, "!--") == 0) {  // comment
            std::size_t end = text_.find("-->", pos_);
            if (end == std::string::npos) fail("unterminated comment");
            count_lines(pos_, end);
            pos_ = end + 3;
            return next(el);
        }
        el = Element{};
        if (text_[pos_] == '/') {
            el.closing = true;
            ++pos_;
        }
        el.name = read_name();
        if (el.name.empty()) fail("expected element name");
        while (true) {
            skip_space();
            if (pos_ >= text_.size()) fail("unterminated tag <" + el.name);
            char c = text_[pos_];
            if (c == '>') {
                ++pos_;
                return true;
            }
            if (c == '/') {
                ++pos_;
                if (pos_ >= text_.size() || text_[pos_] != '>') fail("expected '>' after '/'");
                ++pos_;
                el.self_closing = true;
                return true;
            }
            if (el.closing) fail("attributes on closing tag </" + el.name + ">");
            std::string key = read_name();
            if (key.empty()) fail("expected attribute name in <" + el.name + ">");
            skip_space();
            if (pos_ >= text_.size() || text_[pos_] != '=') fail("expected '=' after attribute " + key);
            ++pos_;
            skip_space();
            if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\''))
                fail("expected quoted value for attribute " + key);
            char quote = text_[pos_++];
            std::size_t end = text_.find(quote, pos_);
            if (end == std::string::npos) fail("unterminated attribute value for " + key);
            count_lines(pos_, end);
            el.attrs[key] = decode_entities(text_.substr(pos_, end - pos_));
            pos_ = end + 1;
        }
    }

    std::size_t line() const { return line_; }

private:
    void skip_space() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }
    void skip_until(char c) {
        while (pos_ < text_.size() && text_[pos_] != c) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
        if (pos_ < text_.size()) ++pos_;
    }
    void count_lines(std::size_t from, std::size_t to) {
        for (std::size_t i = from; i < to; ++i)
            if (text_[i] == '\n') ++line_;
    }
    std::string read_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '>' || c == '/' || c == '=') break;
            ++pos_;
        }
        return text_.substr(start, pos_ - start);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace detail

// Parse an OSM XML extract into geocodable features. Nodes and ways carrying
// a recognized type tag become one MapFeature each; way position is the
// arithmetic centroid of its member nodes. Ways referencing unknown nodes are
// skipped and counted in stats.
inline std::vector<MapFeature> parse_osm(const std::string& xml, ParseStats* stats = nullptr) {
    detail::Scanner sc(xml);
    detail::Element el;
    ParseStats local;

    struct Pending {
        std::string kind;  // "node" or "way"
        std::string id;
        double lat = 0, lon = 0;
        std::vector<std::string> nd_refs;
        std::unordered_map<std::string, std::string> tags;
        bool open = false;
    };

    std::unordered_map<std::string, std::pair<double, double>> node_coords;
    std::vector<MapFeature> out;
    Pending cur;

    auto require_attr = [&](const detail::Element& e, const char* key) -> const std::string& {
        auto it = e.attrs.find(key);
        if (it == e.attrs.end())
            sc.fail("<" + e.name + "> missing required attribute '" + key + "'");
        return it->second;
    };

    auto emit = [&](Pending& p) {
        double lat = p.lat, lon = p.lon;
        if (p.kind == "way") {
            ++local.ways_seen;
            if (p.nd_refs.empty()) return;
            double slat = 0, slon = 0;
            for (const std::string& ref : p.nd_refs) {
                auto it = node_coords.find(ref);
                if (it == node_coords.end()) {
                    ++local.ways_skipped_unknown_node;
                    return;
                }
                slat += it->second.first;
                slon += it->second.second;
            }
            lat = slat / static_cast<double>(p.nd_refs.size());
            lon = slon / static_cast<double>(p.nd_refs.size());
        } else {
            ++local.nodes_seen;
            node_coords[p.id] = {lat, lon};
        }
        for (const std::string& key : type_tag_priority()) {
            auto it = p.tags.find(key);
            if (it == p.tags.end() || it->second.empty()) continue;
            MapFeature f;
            f.feature_id = (p.kind == "way" ? "w" : "n") + p.id;
            f.lat = lat;
            f.lon = lon;
            f.location_type = it->second;
            auto hn = p.tags.find("addr:housenumber");
            if (hn != p.tags.end()) f.address_number = hn->second;
            out.push_back(std::move(f));
            ++local.features_emitted;
            break;
        }
    };

    while (sc.next(el)) {
        if (el.closing) {
            if ((el.name == "node" || el.name == "way") && cur.open && el.name == cur.kind) {
                emit(cur);
                cur = Pending{};
            }
            continue;
        }
        if (el.name == "node") {
            if (cur.open) sc.fail("nested <node>");
            cur = Pending{};
            cur.kind = "node";
            cur.id = require_attr(el, "id");
            cur.lat = std::strtod(require_attr(el, "lat").c_str(), nullptr);
            cur.lon = std::strtod(require_attr(el, "lon").c_str(), nullptr);
            if (cur.lat < -90 || cur.lat > 90 || cur.lon < -180 || cur.lon > 180)
                sc.fail("node " + cur.id + " coordinates out of range");
            if (el.self_closing) {
                emit(cur);
                cur = Pending{};
            } else {
                cur.open = true;
            }
        } else if (el.name == "way") {
            if (cur.open) sc.fail("nested <way>");
            cur = Pending{};
            cur.kind = "way";
            cur.id = require_attr(el, "id");
            if (el.self_closing) {
                cur = Pending{};
            } else {
                cur.open = true;
            }
        } else if (el.name == "tag" && cur.open) {
            cur.tags[require_attr(el, "k")] = require_attr(el, "v");
        } else if (el.name == "nd" && cur.open) {
            cur.nd_refs.push_back(require_attr(el, "ref"));
        }
        // other elements (osm, bounds, relation, member) pass through
    }
    if (cur.open) sc.fail("unclosed <" + cur.kind + ">");

    if (stats) *stats = local;
    return out;
}

inline std::vector<MapFeature> parse_osm_file(const std::string& path, ParseStats* stats = nullptr) {
    return parse_osm(read_file(path), stats);
}

}  // namespace osm
}  // namespace geopriv
