#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pate/csv.hpp"
#include "pate/dataset.hpp"
#include "pate/errors.hpp"

namespace pate {

inline constexpr double kEarthRadiusM = 6'371'000.0;  // mean Earth radius
inline constexpr double kAmenityRadiusM = 1000.0;
inline constexpr double kMetersPerDegLat = kEarthRadiusM * std::numbers::pi / 180.0;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lng = 0.0;  // degrees, [-180, 180]
};

inline std::string validate_geopoint(const GeoPoint& p) {
  if (!(std::isfinite(p.lat) && p.lat >= -90.0 && p.lat <= 90.0))
    return "latitude must be in [-90, 90] degrees (got " + format_double(p.lat) + ")";
  if (!(std::isfinite(p.lng) && p.lng >= -180.0 && p.lng <= 180.0))
    return "longitude must be in [-180, 180] degrees (got " + format_double(p.lng) + ")";
  return {};
}

// Schema order; each category feeds one (count, mean distance) column pair.
enum class PoiCategory : int {
  Transportation = 0,
  Attraction = 1,
  Education = 2,
  Healthcare = 3,
  Restaurant = 4,
  Retail = 5,
};

inline constexpr int kPoiCategoryCount = 6;

inline constexpr std::array<std::string_view, kPoiCategoryCount> kPoiCategoryNames = {
    "Transportation", "Attraction", "Education", "Healthcare", "Restaurant", "Retail"};

inline int poi_category_index(std::string_view name) {
  for (int i = 0; i < kPoiCategoryCount; ++i)
    if (kPoiCategoryNames[static_cast<std::size_t>(i)] == name) return i;
  return -1;
}

struct PoiRecord {
  GeoPoint location;
  PoiCategory category = PoiCategory::Transportation;
};

struct TrafficSample {
  GeoPoint location;
  int minute = 0;      // minutes since local midnight, [0, 1440)
  double speed = 0.0;  // km/h, >= 0
};

// Daily window as a half-open minute range; the default covers 06:00-24:00.
struct TrafficWindow {
  int start_minute = 360;
  int end_minute = 1440;

  bool contains(int minute) const {
    return minute >= start_minute && minute < end_minute;
  }
};

// Per-property microblog emotion counts, ordered
// (anger, detest, happiness, sadness, fear).
struct EmotionTally {
  std::array<std::uint64_t, 5> counts{};
};

inline double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kDeg2Rad = std::numbers::pi / 180.0;
  const double phi1 = a.lat * kDeg2Rad;
  const double phi2 = b.lat * kDeg2Rad;
  const double dphi = (b.lat - a.lat) * kDeg2Rad;
  const double dlng = (b.lng - a.lng) * kDeg2Rad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlng / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

// Uniform lat/lng grid over a point set; query returns (index, distance)
// pairs in ascending index order, so aggregates match a flat scan bit for bit.
class GeoGridIndex {
 public:
  GeoGridIndex(std::span<const GeoPoint> points, double radius_m)
      : points_(points.begin(), points.end()), radius_m_(radius_m) {
    cell_lat_deg_ = radius_m_ / kMetersPerDegLat;
    double min_cos = 1.0;
    for (const auto& p : points_)
      min_cos = std::min(min_cos, std::cos(p.lat * std::numbers::pi / 180.0));
    min_cos = std::max(min_cos, 0.05);
    cell_lng_deg_ = radius_m_ / (kMetersPerDegLat * min_cos);
    for (std::size_t i = 0; i < points_.size(); ++i)
      cells_[cell_key(points_[i])].push_back(static_cast<std::int32_t>(i));
  }

  std::vector<std::pair<std::int32_t, double>> query(const GeoPoint& p) const {
    std::vector<std::pair<std::int32_t, double>> hits;
    const double dlat = radius_m_ / kMetersPerDegLat;
    const double band = std::min(89.9, std::max(std::abs(p.lat - dlat), std::abs(p.lat + dlat)));
    const double cos_band = std::max(std::cos(band * std::numbers::pi / 180.0), 0.05);
    const double dlng = radius_m_ / (kMetersPerDegLat * cos_band);

    const auto lat_lo = cell_of(p.lat - dlat, cell_lat_deg_);
    const auto lat_hi = cell_of(p.lat + dlat, cell_lat_deg_);
    const auto lng_lo = cell_of(p.lng - dlng, cell_lng_deg_);
    const auto lng_hi = cell_of(p.lng + dlng, cell_lng_deg_);
    for (std::int64_t la = lat_lo; la <= lat_hi; ++la) {
      for (std::int64_t lo = lng_lo; lo <= lng_hi; ++lo) {
        const auto it = cells_.find((la << 32) ^ (lo & 0xffffffffLL));
        if (it == cells_.end()) continue;
        for (std::int32_t idx : it->second) {
          const double d = haversine_m(p, points_[static_cast<std::size_t>(idx)]);
          if (d <= radius_m_) hits.emplace_back(idx, d);
        }
      }
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return hits;
  }

  double radius_m() const { return radius_m_; }

 private:
  static std::int64_t cell_of(double deg, double cell_deg) {
    return static_cast<std::int64_t>(std::floor(deg / cell_deg));
  }
  std::int64_t cell_key(const GeoPoint& p) const {
    return (cell_of(p.lat, cell_lat_deg_) << 32) ^
           (cell_of(p.lng, cell_lng_deg_) & 0xffffffffLL);
  }

  std::vector<GeoPoint> points_;
  double radius_m_;
  double cell_lat_deg_ = 1.0;
  double cell_lng_deg_ = 1.0;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> cells_;
};

namespace detail {

// Shared accumulator: count and mean distance per category, schema column
// order (indices 8..19). Empty categories get the radius cap as sentinel.
struct AmenityAccum {
  std::array<double, kPoiCategoryCount> count{};
  std::array<double, kPoiCategoryCount> dist_sum{};

  void add(PoiCategory cat, double dist) {
    const auto c = static_cast<std::size_t>(cat);
    count[c] += 1.0;
    dist_sum[c] += dist;
  }

  std::array<double, 12> finish() const {
    std::array<double, 12> out{};
    for (int c = 0; c < kPoiCategoryCount; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      out[cc * 2] = count[cc];
      if (count[cc] > 0.0) {
        // Rounding in the sum can push the mean a hair past the cap; clamp.
        out[cc * 2 + 1] = std::min(dist_sum[cc] / count[cc], kAmenityRadiusM);
      } else {
        out[cc * 2 + 1] = kAmenityRadiusM;
      }
    }
    return out;
  }
};

}  // namespace detail

// Flat scan over all POIs; radius comparison is inclusive.
inline std::array<double, 12> amenity_features(const GeoPoint& home,
                                               std::span<const PoiRecord> pois) {
  detail::AmenityAccum acc;
  for (const auto& poi : pois) {
    const double d = haversine_m(home, poi.location);
    if (d <= kAmenityRadiusM) acc.add(poi.category, d);
  }
  return acc.finish();
}

// Grid-indexed variant; must (and does) return the same values as the flat
// scan. `index` must have been built over the locations of `pois` with
// radius kAmenityRadiusM.
inline std::array<double, 12> amenity_features(const GeoPoint& home,
                                               std::span<const PoiRecord> pois,
                                               const GeoGridIndex& index) {
  detail::AmenityAccum acc;
  for (const auto& [idx, d] : index.query(home))
    acc.add(pois[static_cast<std::size_t>(idx)].category, d);
  return acc.finish();
}

// Mean speed over samples inside the window (TrfV, schema index 20).
inline double traffic_feature(std::span<const TrafficSample> samples,
                              const TrafficWindow& window = {}) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (!window.contains(s.minute)) continue;
    sum += s.speed;
    ++n;
  }
  if (n == 0) throw NoSamples("traffic_feature: no samples inside the daily window");
  return sum / static_cast<double>(n);
}

// Percentages in tally order. All zeros for an empty tally; otherwise the
// last nonzero category absorbs the rounding residue, which makes the plain
// left-to-right sum of the five values exactly 100 (zero entries add
// exactly, and x + (100 - x) rounds back to 100 for x in [0, 100]).
inline std::array<double, 5> emotion_features(const EmotionTally& tally) {
  std::array<double, 5> out{};
  std::uint64_t total = 0;
  for (std::uint64_t c : tally.counts) total += c;
  if (total == 0) return out;
  std::size_t absorber = 0;
  for (std::size_t i = 0; i < 5; ++i)
    if (tally.counts[i] > 0) absorber = i;
  double others = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    if (i == absorber) continue;
    out[i] = 100.0 * static_cast<double>(tally.counts[i]) / static_cast<double>(total);
    others += out[i];
  }
  out[absorber] = std::clamp(100.0 - others, 0.0, 100.0);
  return out;
}

// ---------------------------------------------------------------------------
// Raw-source files
// ---------------------------------------------------------------------------

// One row of the raw property file: the eight structural property features
// plus the price target; amenity/traffic/emotion columns are derived, not read.
struct RawProperty {
  std::array<double, 8> features{};  // Year,Elvt,RmNum,HllNum,KchNum,BthNum,Lat,Lng
  double price = 0.0;

  GeoPoint location() const { return {features[6], features[7]}; }
};

inline constexpr std::string_view kPropertiesHeader =
    "Year,Elvt,RmNum,HllNum,KchNum,BthNum,Lat,Lng,Price";
inline constexpr std::string_view kPoisHeader = "lat,lng,category";
inline constexpr std::string_view kTrafficHeader = "lat,lng,minute,speed";
inline constexpr std::string_view kEmotionsHeader =
    "property_row,anger,detest,happiness,sadness,fear";

namespace detail {

inline void check_header(const std::vector<std::string>& lines, std::string_view expect,
                         const std::filesystem::path& path) {
  if (lines.empty())
    throw MissingColumn("empty file, expected header \"" + std::string(expect) +
                        "\": " + path.string());
  if (lines[0] != expect)
    throw MissingColumn("header mismatch in " + path.string() + ": expected \"" +
                        std::string(expect) + "\", got \"" + lines[0] + "\"");
}

inline std::vector<std::string_view> row_fields(const std::string& line, std::size_t row,
                                                std::size_t expect_count) {
  const auto fields = csv::split_fields(line);
  if (fields.size() != expect_count)
    throw ParseError("data row " + std::to_string(row) + ": expected " +
                     std::to_string(expect_count) + " fields, got " +
                     std::to_string(fields.size()));
  return fields;
}

inline std::uint64_t parse_count(std::string_view field, std::size_t row,
                                 std::string_view column) {
  const double v = csv::parse_field(field, row, column);
  if (v < 0.0 || std::floor(v) != v)
    throw InvariantViolation("data row " + std::to_string(row) + ": " +
                             std::string(column) + " must be a non-negative integer (got " +
                             std::string(field) + ")");
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

inline std::vector<RawProperty> load_properties(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  detail::check_header(lines, kPropertiesHeader, path);
  const auto names = csv::split_fields(kPropertiesHeader);
  std::vector<RawProperty> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() && li + 1 == lines.size()) break;
    const auto fields = detail::row_fields(lines[li], li, 9);
    RawProperty p;
    for (std::size_t c = 0; c < 8; ++c)
      p.features[c] = csv::parse_field(fields[c], li, names[c]);
    p.price = csv::parse_field(fields[8], li, kPriceName);

    // Property-block invariants mirror the full-record ones.
    PropertyRecord probe;
    std::copy(p.features.begin(), p.features.end(), probe.features.begin());
    probe.features[9] = probe.features[11] = probe.features[13] = 0.0;
    probe.features[15] = probe.features[17] = probe.features[19] = 0.0;
    probe.price = p.price;
    if (std::string msg = validate_record(probe); !msg.empty())
      throw InvariantViolation("data row " + std::to_string(li) + ": " + msg);
    if (std::string msg = validate_geopoint(p.location()); !msg.empty())
      throw InvariantViolation("data row " + std::to_string(li) + ": " + msg);
    out.push_back(p);
  }
  if (out.empty()) throw EmptyDataset("no data rows in " + path.string());
  return out;
}

inline std::vector<PoiRecord> load_pois(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  detail::check_header(lines, kPoisHeader, path);
  std::vector<PoiRecord> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() && li + 1 == lines.size()) break;
    const auto fields = detail::row_fields(lines[li], li, 3);
    PoiRecord poi;
    poi.location.lat = csv::parse_field(fields[0], li, "lat");
    poi.location.lng = csv::parse_field(fields[1], li, "lng");
    const int cat = poi_category_index(fields[2]);
    if (cat < 0)
      throw InvariantViolation("data row " + std::to_string(li) +
                               ": unknown POI category \"" + std::string(fields[2]) + "\"");
    poi.category = static_cast<PoiCategory>(cat);
    if (std::string msg = validate_geopoint(poi.location); !msg.empty())
      throw InvariantViolation("data row " + std::to_string(li) + ": " + msg);
    out.push_back(poi);
  }
  return out;
}

inline std::vector<TrafficSample> load_traffic(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  detail::check_header(lines, kTrafficHeader, path);
  std::vector<TrafficSample> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() && li + 1 == lines.size()) break;
    const auto fields = detail::row_fields(lines[li], li, 4);
    TrafficSample s;
    s.location.lat = csv::parse_field(fields[0], li, "lat");
    s.location.lng = csv::parse_field(fields[1], li, "lng");
    const double minute = csv::parse_field(fields[2], li, "minute");
    if (minute < 0.0 || minute >= 1440.0 || std::floor(minute) != minute)
      throw InvariantViolation("data row " + std::to_string(li) +
                               ": minute must be an integer in [0, 1440) (got " +
                               std::string(fields[2]) + ")");
    s.minute = static_cast<int>(minute);
    s.speed = csv::parse_field(fields[3], li, "speed");
    if (!(std::isfinite(s.speed) && s.speed >= 0.0))
      throw InvariantViolation("data row " + std::to_string(li) +
                               ": speed must be >= 0 (got " + std::string(fields[3]) + ")");
    if (std::string msg = validate_geopoint(s.location); !msg.empty())
      throw InvariantViolation("data row " + std::to_string(li) + ": " + msg);
    out.push_back(s);
  }
  return out;
}

// Keyed by 0-based property data row. Duplicate rows are rejected.
inline std::map<std::size_t, EmotionTally> load_emotions(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  detail::check_header(lines, kEmotionsHeader, path);
  std::map<std::size_t, EmotionTally> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() && li + 1 == lines.size()) break;
    const auto fields = detail::row_fields(lines[li], li, 6);
    const std::size_t row =
        static_cast<std::size_t>(detail::parse_count(fields[0], li, "property_row"));
    EmotionTally tally;
    static constexpr std::array<std::string_view, 5> kCols = {
        "anger", "detest", "happiness", "sadness", "fear"};
    for (std::size_t c = 0; c < 5; ++c)
      tally.counts[c] = detail::parse_count(fields[c + 1], li, kCols[c]);
    if (!out.emplace(row, tally).second)
      throw InvariantViolation("data row " + std::to_string(li) +
                               ": duplicate property_row " + std::to_string(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full derivation: raw sources -> 27-column dataset
// ---------------------------------------------------------------------------

// Traffic samples attach to a property when they fall within the same 1 km
// radius used for amenities. A property with no attached samples inside the
// window is an error; a property missing from the emotion file gets a zero
// tally (all-zero percentages).
inline Dataset derive_dataset(std::span<const RawProperty> properties,
                              std::span<const PoiRecord> pois,
                              std::span<const TrafficSample> traffic,
                              const std::map<std::size_t, EmotionTally>& emotions,
                              const TrafficWindow& window = {}) {
  if (properties.empty()) throw EmptyDataset("derive_dataset: no properties");

  std::vector<GeoPoint> poi_points;
  poi_points.reserve(pois.size());
  for (const auto& p : pois) poi_points.push_back(p.location);
  const GeoGridIndex poi_index(poi_points, kAmenityRadiusM);

  std::vector<GeoPoint> traffic_points;
  traffic_points.reserve(traffic.size());
  for (const auto& s : traffic) traffic_points.push_back(s.location);
  const GeoGridIndex traffic_index(traffic_points, kAmenityRadiusM);

  Dataset out;
  out.provenance = "derived";
  out.records.reserve(properties.size());
  for (std::size_t i = 0; i < properties.size(); ++i) {
    const RawProperty& prop = properties[i];
    PropertyRecord rec;
    std::copy(prop.features.begin(), prop.features.end(), rec.features.begin());
    rec.price = prop.price;

    const auto amenity = amenity_features(prop.location(), pois, poi_index);
    std::copy(amenity.begin(), amenity.end(), rec.features.begin() + 8);

    std::vector<TrafficSample> nearby;
    for (const auto& [idx, d] : traffic_index.query(prop.location()))
      nearby.push_back(traffic[static_cast<std::size_t>(idx)]);
    try {
      rec.features[20] = traffic_feature(nearby, window);
    } catch (const NoSamples&) {
      throw NoSamples("property row " + std::to_string(i + 1) +
                      ": no traffic samples within " + format_double(kAmenityRadiusM) +
                      " m inside the daily window");
    }

    EmotionTally tally;
    if (const auto it = emotions.find(i); it != emotions.end()) tally = it->second;
    const auto pct = emotion_features(tally);
    std::copy(pct.begin(), pct.end(), rec.features.begin() + 21);

    if (std::string msg = validate_record(rec); !msg.empty())
      throw InvariantViolation("derived row " + std::to_string(i + 1) + ": " + msg);
    out.records.push_back(rec);
  }
  return out;
}

}  // namespace pate
