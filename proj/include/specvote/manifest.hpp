#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specvote/errors.hpp"

namespace specvote {

/// One image entry: a name (also the output subdirectory) and one
/// feature file per source.
struct ManifestImage {
  std::string name;
  std::map<std::string, std::filesystem::path> features;
};

struct Manifest {
  std::vector<ManifestImage> images;
};

namespace detail {

inline void check_path_component(const std::string& name, const char* what) {
  if (name.empty())
    throw format_error(std::string("manifest: ") + what +
                       " must be non-empty");
  if (name == "." || name == ".." || name.find('/') != std::string::npos ||
      name.find('\\') != std::string::npos)
    throw format_error(std::string("manifest: ") + what + " '" + name +
                       "' must be a plain file name component");
}

}  // namespace detail

/// Read a run manifest:
///
///   { "images": [ { "name": "img_0001",
///                   "features": { "srcA": "feats/a/img_0001.npy" } } ] }
///
/// Relative feature paths are resolved against the manifest's directory.
/// Image names must be unique and usable as directory names.
inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw format_error("manifest " + path.string() + ": " + e.what());
  }

  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array())
    throw format_error("manifest " + path.string() +
                       ": expected an object with an \"images\" array");

  const std::filesystem::path base = path.parent_path();
  Manifest manifest;
  std::set<std::string> seen;
  for (const auto& entry : doc["images"]) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry["name"].is_string() || !entry.contains("features") ||
        !entry["features"].is_object())
      throw format_error("manifest " + path.string() +
                         ": each image needs a \"name\" string and a "
                         "\"features\" object");
    ManifestImage image;
    image.name = entry["name"].get<std::string>();
    detail::check_path_component(image.name, "image name");
    if (!seen.insert(image.name).second)
      throw format_error("manifest: duplicate image name '" + image.name +
                         "'");
    for (const auto& [source, value] : entry["features"].items()) {
      detail::check_path_component(source, "feature source name");
      if (!value.is_string())
        throw format_error("manifest: image '" + image.name +
                           "' has a malformed features entry");
      std::filesystem::path p = value.get<std::string>();
      if (p.is_relative()) p = base / p;
      image.features.emplace(source, std::move(p));
    }
    if (image.features.empty())
      throw format_error("manifest: image '" + image.name +
                         "' lists no feature sources");
    manifest.images.push_back(std::move(image));
  }
  if (manifest.images.empty())
    throw format_error("manifest " + path.string() + " lists no images");
  return manifest;
}

}  // namespace specvote
