#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pate/csv.hpp"
#include "pate/errors.hpp"
#include "pate/numeric.hpp"

namespace pate {

enum class FeatureCategory { Property, Amenity, Traffic, Emotions };

struct FeatureInfo {
  int index;
  std::string_view name;
  FeatureCategory category;
};

inline constexpr int kFeatureCount = 26;
inline constexpr int kColumnCount = kFeatureCount + 1;  // features + Price
inline constexpr std::string_view kPriceName = "Price";

// Column order is the wire format; every CSV this library reads or writes
// uses exactly this header.
inline constexpr std::string_view kCsvHeader =
    "Year,Elvt,RmNum,HllNum,KchNum,BthNum,Lat,Lng,TspNum,TspDst,AtrNum,AtrDst,"
    "EdcNum,EdcDst,HthNum,HthDst,RstNum,RstDst,RtlNum,RtlDst,TrfV,AgrPct,"
    "DstPct,HppPct,SadPct,FeaPct,Price";

inline constexpr std::array<FeatureInfo, kFeatureCount> kFeatureSchema = {{
    {0, "Year", FeatureCategory::Property},
    {1, "Elvt", FeatureCategory::Property},
    {2, "RmNum", FeatureCategory::Property},
    {3, "HllNum", FeatureCategory::Property},
    {4, "KchNum", FeatureCategory::Property},
    {5, "BthNum", FeatureCategory::Property},
    {6, "Lat", FeatureCategory::Property},
    {7, "Lng", FeatureCategory::Property},
    {8, "TspNum", FeatureCategory::Amenity},
    {9, "TspDst", FeatureCategory::Amenity},
    {10, "AtrNum", FeatureCategory::Amenity},
    {11, "AtrDst", FeatureCategory::Amenity},
    {12, "EdcNum", FeatureCategory::Amenity},
    {13, "EdcDst", FeatureCategory::Amenity},
    {14, "HthNum", FeatureCategory::Amenity},
    {15, "HthDst", FeatureCategory::Amenity},
    {16, "RstNum", FeatureCategory::Amenity},
    {17, "RstDst", FeatureCategory::Amenity},
    {18, "RtlNum", FeatureCategory::Amenity},
    {19, "RtlDst", FeatureCategory::Amenity},
    {20, "TrfV", FeatureCategory::Traffic},
    {21, "AgrPct", FeatureCategory::Emotions},
    {22, "DstPct", FeatureCategory::Emotions},
    {23, "HppPct", FeatureCategory::Emotions},
    {24, "SadPct", FeatureCategory::Emotions},
    {25, "FeaPct", FeatureCategory::Emotions},
}};

inline std::string_view feature_name(int index) {
  return kFeatureSchema.at(static_cast<std::size_t>(index)).name;
}

inline FeatureCategory feature_category(int index) {
  return kFeatureSchema.at(static_cast<std::size_t>(index)).category;
}

// -1 when the name is unknown.
inline int feature_index(std::string_view name) {
  for (const auto& f : kFeatureSchema)
    if (f.name == name) return f.index;
  return -1;
}

inline std::vector<int> features_in_category(FeatureCategory cat) {
  std::vector<int> out;
  for (const auto& f : kFeatureSchema)
    if (f.category == cat) out.push_back(f.index);
  return out;
}

struct PropertyRecord {
  std::array<double, kFeatureCount> features{};
  double price = 0.0;  // RMB per square meter

  friend bool operator==(const PropertyRecord&, const PropertyRecord&) = default;
};

// Empty string when the record is valid, otherwise a description of the
// first violated invariant.
inline std::string validate_record(const PropertyRecord& rec) {
  for (int i = 0; i < kFeatureCount; ++i) {
    if (!std::isfinite(rec.features[i]))
      return std::string(feature_name(i)) + " must be finite";
  }
  if (!std::isfinite(rec.price) || rec.price <= 0.0)
    return "Price must be a finite value > 0 (got " + format_double(rec.price) + ")";
  const double elvt = rec.features[1];
  if (elvt != 0.0 && elvt != 1.0)
    return "Elvt must be 0 or 1 (got " + format_double(elvt) + ")";
  for (int i = 2; i <= 5; ++i) {
    const double v = rec.features[i];
    if (v < 0.0 || std::floor(v) != v)
      return std::string(feature_name(i)) + " must be a non-negative integer (got " +
             format_double(v) + ")";
  }
  for (int i = 8; i <= 18; i += 2) {
    if (rec.features[i] < 0.0)
      return std::string(feature_name(i)) + " must be >= 0 (got " +
             format_double(rec.features[i]) + ")";
  }
  for (int i = 9; i <= 19; i += 2) {
    const double v = rec.features[i];
    if (v < 0.0 || v > 1000.0)
      return std::string(feature_name(i)) + " must be in [0, 1000] meters (got " +
             format_double(v) + ")";
  }
  for (int i = 21; i <= 25; ++i) {
    const double v = rec.features[i];
    if (v < 0.0 || v > 100.0)
      return std::string(feature_name(i)) + " must be in [0, 100] percent (got " +
             format_double(v) + ")";
  }
  return {};
}

struct Dataset {
  std::vector<PropertyRecord> records;
  std::string provenance;  // source-file identifier

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  static std::span<const FeatureInfo> schema() { return kFeatureSchema; }
};

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
};

inline std::vector<double> feature_column(const Dataset& data, int index) {
  std::vector<double> col;
  col.reserve(data.size());
  for (const auto& r : data.records)
    col.push_back(r.features.at(static_cast<std::size_t>(index)));
  return col;
}

inline std::vector<double> price_column(const Dataset& data) {
  std::vector<double> col;
  col.reserve(data.size());
  for (const auto& r : data.records) col.push_back(r.price);
  return col;
}

// Reads a 27-column CSV with the exact kCsvHeader header. Row numbers in
// diagnostics are 1-based data rows (the header is row 0).
inline Dataset ingest_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.empty())
    throw MissingColumn("empty file, expected header \"" + std::string(kCsvHeader) +
                        "\": " + path.string());

  if (lines[0] != kCsvHeader) {
    const auto expected = csv::split_fields(kCsvHeader);
    const auto got = csv::split_fields(lines[0]);
    for (std::size_t i = 0; i < std::max(expected.size(), got.size()); ++i) {
      const std::string_view want = i < expected.size() ? expected[i] : "<none>";
      const std::string_view have = i < got.size() ? got[i] : "<none>";
      if (want != have)
        throw MissingColumn("header mismatch at column " + std::to_string(i) +
                            ": expected \"" + std::string(want) + "\", got \"" +
                            std::string(have) + "\"");
    }
    throw MissingColumn("malformed header: " + lines[0]);
  }

  Dataset data;
  data.provenance = path.string();
  const auto names = csv::split_fields(kCsvHeader);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() && li + 1 == lines.size()) break;  // trailing blank line
    const std::size_t row = li;  // 1-based data row
    const auto fields = csv::split_fields(lines[li]);
    if (fields.size() != kColumnCount)
      throw ParseError("data row " + std::to_string(row) + ": expected " +
                       std::to_string(kColumnCount) + " fields, got " +
                       std::to_string(fields.size()));
    PropertyRecord rec;
    for (int c = 0; c < kFeatureCount; ++c)
      rec.features[static_cast<std::size_t>(c)] =
          csv::parse_field(fields[static_cast<std::size_t>(c)], row, names[static_cast<std::size_t>(c)]);
    rec.price = csv::parse_field(fields[kFeatureCount], row, kPriceName);
    if (std::string msg = validate_record(rec); !msg.empty())
      throw InvariantViolation("data row " + std::to_string(row) + ": " + msg);
    data.records.push_back(rec);
  }
  if (data.records.empty())
    throw EmptyDataset("no data rows in " + path.string());
  return data;
}

// Seeded uniform shuffle (Fisher-Yates over the portable Rng) followed by a
// prefix cut at floor(n * train_fraction). Byte-identical for a fixed seed.
inline std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  if (data.empty()) throw EmptyDataset("split: dataset has no records");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw InvariantViolation("train_fraction must be in (0, 1), got " +
                             format_double(spec.train_fraction));

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.bounded(i + 1);
    std::swap(order[i], order[j]);
  }

  const std::size_t train_n = floor_fraction(n, spec.train_fraction);
  Dataset train, test;
  train.provenance = data.provenance;
  test.provenance = data.provenance;
  train.records.reserve(train_n);
  test.records.reserve(n - train_n);
  for (std::size_t i = 0; i < n; ++i) {
    (i < train_n ? train : test).records.push_back(data.records[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace pate
