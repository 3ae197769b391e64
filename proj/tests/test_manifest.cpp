#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "specvote/manifest.hpp"

using namespace specvote;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("specvote-manifest-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

fs::path write(const fs::path& dir, const std::string& name,
               const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << text;
  return p;
}

}  // namespace

TEST_CASE("manifest parses and resolves relative paths", "[manifest]") {
  TempDir tmp;
  const fs::path file = write(tmp.path, "run.json", R"({
    "images": [
      {"name": "img_b", "features": {"dino": "feats/img_b.npy"}},
      {"name": "img_a", "features": {"dino": "/abs/img_a.npy",
                                     "moco": "moco/img_a.npy"}}
    ]
  })");
  const Manifest manifest = read_manifest(file);
  REQUIRE(manifest.images.size() == 2);
  CHECK(manifest.images[0].name == "img_b");
  CHECK(manifest.images[0].features.at("dino") ==
        tmp.path / "feats/img_b.npy");
  CHECK(manifest.images[1].features.at("dino") == fs::path("/abs/img_a.npy"));
  CHECK(manifest.images[1].features.at("moco") ==
        tmp.path / "moco/img_a.npy");
}

TEST_CASE("manifest rejects malformed documents", "[manifest]") {
  TempDir tmp;
  CHECK_THROWS_AS(read_manifest(tmp.path / "absent.json"), io_error);

  CHECK_THROWS_AS(
      read_manifest(write(tmp.path, "broken.json", "{ not json")), format_error);

  CHECK_THROWS_AS(
      read_manifest(write(tmp.path, "no-images.json", R"({"items": []})")),
      format_error);

  CHECK_THROWS_AS(
      read_manifest(write(tmp.path, "empty.json", R"({"images": []})")),
      format_error);

  CHECK_THROWS_AS(
      read_manifest(write(tmp.path, "no-name.json",
                          R"({"images": [{"features": {"a": "x.npy"}}]})")),
      format_error);

  CHECK_THROWS_AS(read_manifest(write(
                      tmp.path, "bad-features.json",
                      R"({"images": [{"name": "i", "features": {"a": 5}}]})")),
                  format_error);

  CHECK_THROWS_AS(
      read_manifest(write(tmp.path, "no-sources.json",
                          R"({"images": [{"name": "i", "features": {}}]})")),
      format_error);
}

TEST_CASE("manifest rejects unusable names", "[manifest]") {
  TempDir tmp;
  CHECK_THROWS_AS(
      read_manifest(write(
          tmp.path, "slash.json",
          R"({"images": [{"name": "a/b", "features": {"s": "x.npy"}}]})")),
      format_error);

  CHECK_THROWS_AS(
      read_manifest(write(
          tmp.path, "dots.json",
          R"({"images": [{"name": "..", "features": {"s": "x.npy"}}]})")),
      format_error);

  CHECK_THROWS_AS(
      read_manifest(write(
          tmp.path, "empty-name.json",
          R"({"images": [{"name": "", "features": {"s": "x.npy"}}]})")),
      format_error);

  CHECK_THROWS_AS(
      read_manifest(write(
          tmp.path, "bad-source.json",
          R"({"images": [{"name": "i", "features": {"s/s": "x.npy"}}]})")),
      format_error);

  CHECK_THROWS_AS(
      read_manifest(write(tmp.path, "dupe.json", R"({
        "images": [{"name": "i", "features": {"s": "x.npy"}},
                   {"name": "i", "features": {"s": "y.npy"}}]
      })")),
      format_error);
}
