#pragma once

#include "coarse/distortion.hpp"

#include <filesystem>
#include <string>

#include <json.hpp>

namespace coarse {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Artifact kinds, stored in the "format" field as "coarse/<kind>".
enum class ArtifactKind { Space, Cover, Tower, Trees, Embedding, Report };

std::string to_string(ArtifactKind kind);
/// Reads the "format"/"version" header; Error(ParseError) when unknown.
ArtifactKind artifact_kind(const Json& doc);

Json to_json(const FiniteMetricSpace& space);
SpacePtr space_from_json(const Json& doc, std::size_t max_points = kDefaultMaxPoints);

/// The cover document embeds its space.
Json to_json(const ColoredCover& cover);
ColoredCover cover_from_json(const Json& doc, std::size_t max_points = kDefaultMaxPoints);

Json to_json(const CoverTower& tower);
CoverTower tower_from_json(const Json& doc, std::size_t max_points = kDefaultMaxPoints);

/// Node tables of every color; the document embeds the tower.
Json to_json(const CoverTower& tower, const std::vector<ScaleTree>& trees);
std::vector<ScaleTree> trees_from_json(const Json& doc, const CoverTower& tower);

/// Per point, the (node, offset) pair of every color; embeds the trees document.
Json to_json(const CoverTower& tower, const std::vector<ScaleTree>& trees, const Embedding& embedding);
Embedding embedding_from_json(const Json& doc, const CoverTower& tower);

Json to_json(const DistortionReport& report, const CoverTower& tower);

/// One row per distance bucket: distance,rho1,rho2,pairs.
std::string report_csv(const DistortionReport& report);

Json read_json(const std::filesystem::path& path);
/// Writes text atomically enough for tests: the file appears only after a full write.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string dump(const Json& doc);

}  // namespace coarse
