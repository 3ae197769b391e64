#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specvote/array_io.hpp"
#include "specvote/errors.hpp"
#include "specvote/gradcheck.hpp"
#include "specvote/manifest.hpp"
#include "specvote/metrics.hpp"
#include "specvote/parallel.hpp"
#include "specvote/rng.hpp"
#include "specvote/spectral.hpp"
#include "specvote/voting.hpp"

namespace specvote {

/// Shared configuration of the batch subcommands.
struct RunConfig {
  std::filesystem::path manifest;
  std::vector<std::string> sources;  // empty: use every source in the entry
  std::vector<int> ks{2, 3, 4};
  std::uint64_t seed = 0;
  std::filesystem::path out;
  int workers = 1;
  int upsample_h = 0;
  int upsample_w = 0;
  bool keep_going = false;
};

struct EvalConfig {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  std::filesystem::path out;
  bool allow_missing = false;
  bool write_csv = false;
};

namespace detail {

inline void validate_run_config(const RunConfig& config) {
  if (config.manifest.empty()) throw parameter_error("--manifest is required");
  if (config.out.empty()) throw parameter_error("--out is required");
  if (config.ks.empty()) throw parameter_error("ks must be non-empty");
  for (int k : config.ks)
    if (k < 1) throw parameter_error("every k must be >= 1");
  if (config.workers < 1) throw parameter_error("--workers must be >= 1");
  if ((config.upsample_h > 0) != (config.upsample_w > 0) ||
      config.upsample_h < 0 || config.upsample_w < 0)
    throw parameter_error("--upsample needs two positive dimensions");
}

/// Sources to use for one image, in request order (or every listed
/// source, name-sorted, when none were requested).
inline std::vector<std::string> sources_for(const ManifestImage& image,
                                            const std::vector<std::string>&
                                                requested) {
  std::vector<std::string> names;
  if (requested.empty()) {
    for (const auto& [name, path] : image.features) names.push_back(name);
  } else {
    for (const std::string& name : requested) {
      if (!image.features.count(name))
        throw data_error("image '" + image.name +
                         "' lists no feature source '" + name + "'");
      names.push_back(name);
    }
  }
  return names;
}

inline std::vector<NamedFeatureMap> load_features(
    const ManifestImage& image, const std::vector<std::string>& sources) {
  std::vector<NamedFeatureMap> named;
  named.reserve(sources.size());
  for (const std::string& source : sources)
    named.push_back(
        NamedFeatureMap{source, read_feature_map(image.features.at(source))});
  return named;
}

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

struct ImageFailure {
  std::string image;
  std::string error;
  bool internal = false;
};

/// Run fn over every manifest image on the worker pool, trapping
/// per-image failures. Without keep_going a failure stops further images
/// from being claimed; already running ones still finish.
template <typename Fn>
inline int run_batch(const Manifest& manifest, const RunConfig& config,
                     const char* verb, Fn&& fn) {
  const std::size_t n = manifest.images.size();
  std::vector<ImageFailure> failures(n);
  std::vector<char> failed(n, 0), skipped(n, 0);
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;

  parallel_for(n, config.workers, [&](std::size_t i) {
    if (stop.load(std::memory_order_relaxed)) {
      skipped[i] = 1;
      return;
    }
    const ManifestImage& image = manifest.images[i];
    try {
      fn(image);
    } catch (const error& e) {
      failures[i] = ImageFailure{image.name, e.what(), false};
      failed[i] = 1;
      if (!config.keep_going) stop.store(true, std::memory_order_relaxed);
    } catch (const std::exception& e) {
      failures[i] = ImageFailure{image.name, e.what(), true};
      failed[i] = 1;
      if (!config.keep_going) stop.store(true, std::memory_order_relaxed);
    }
    const std::size_t count = done.fetch_add(1) + 1;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::fprintf(stderr, "[%s] %zu/%zu %s %s\n", verb, count, n,
                 image.name.c_str(), failed[i] ? "FAILED" : "ok");
  });

  bool any_failed = false, any_internal = false;
  nlohmann::json failed_list = nlohmann::json::array();
  std::size_t succeeded = 0, skipped_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (failed[i]) {
      any_failed = true;
      any_internal = any_internal || failures[i].internal;
      failed_list.push_back(
          {{"image", failures[i].image},
           {"error", failures[i].error},
           {"kind", failures[i].internal ? "internal" : "input"}});
    } else if (skipped[i]) {
      ++skipped_count;
    } else {
      ++succeeded;
    }
  }
  if (any_failed) {
    write_json(config.out / "errors.json",
               {{"failed", failed_list},
                {"succeeded", succeeded},
                {"skipped", skipped_count},
                {"total", n}});
    std::fprintf(stderr, "[%s] %zu/%zu images failed, see %s\n", verb,
                 failed_list.size(), n,
                 (config.out / "errors.json").string().c_str());
    return any_internal ? 2 : 1;
  }
  return 0;
}

}  // namespace detail

/// `cluster`: for every image and every (source, k), run spectral
/// clustering and write one PGM per cluster plus a provenance sidecar.
inline int run_cluster(const RunConfig& config) {
  detail::validate_run_config(config);
  const Manifest manifest = read_manifest(config.manifest);
  std::filesystem::create_directories(config.out);

  return detail::run_batch(
      manifest, config, "cluster", [&](const ManifestImage& image) {
        const std::uint64_t image_seed = derive_seed(config.seed, image.name);
        const std::vector<std::string> sources =
            detail::sources_for(image, config.sources);
        const std::filesystem::path dir = config.out / image.name;
        std::filesystem::create_directories(dir);

        nlohmann::json runs = nlohmann::json::array();
        for (const std::string& source : sources) {
          const FeatureMap features =
              read_feature_map(image.features.at(source));
          for (int k : config.ks) {
            const std::uint64_t run_seed =
                derive_seed(image_seed, source, static_cast<std::uint64_t>(k));
            const MaskSet set =
                spectral_cluster(features, k, run_seed, source);
            nlohmann::json files = nlohmann::json::array();
            for (int c = 0; c < k; ++c) {
              const std::string file = source + "_k" + std::to_string(k) +
                                       "_c" + std::to_string(c) + ".pgm";
              write_mask(set.masks[c], dir / file);
              files.push_back(file);
            }
            runs.push_back({{"source", source},
                            {"k", k},
                            {"seed", run_seed},
                            {"grid", {features.h, features.w}},
                            {"files", files}});
          }
        }
        detail::write_json(dir / "clusters.json",
                           {{"image", image.name},
                            {"root_seed", config.seed},
                            {"image_seed", image_seed},
                            {"runs", runs}});
      });
}

/// `pseudo-label`: build the candidate pool over all (source, k) runs,
/// vote, and write the winning mask (optionally nearest-upsampled) with
/// a sidecar recording the vote.
inline int run_pseudo_label(const RunConfig& config) {
  detail::validate_run_config(config);
  const Manifest manifest = read_manifest(config.manifest);
  std::filesystem::create_directories(config.out);

  return detail::run_batch(
      manifest, config, "pseudo-label", [&](const ManifestImage& image) {
        const std::uint64_t image_seed = derive_seed(config.seed, image.name);
        const std::vector<std::string> sources =
            detail::sources_for(image, config.sources);
        const std::vector<NamedFeatureMap> named =
            detail::load_features(image, sources);

        const CandidatePool pool =
            generate_candidates(named, config.ks, image_seed);
        VoteResult vote;
        const BinaryMask& winner =
            select_pseudo_mask(pool, image_seed, &vote);
        const MaskProvenance& origin = pool.provenance[vote.winner];

        const std::filesystem::path dir = config.out / image.name;
        std::filesystem::create_directories(dir);
        write_mask(winner, dir / "pseudo.pgm");
        if (config.upsample_h > 0)
          write_mask(resize_mask_nearest(winner, config.upsample_h,
                                         config.upsample_w),
                     dir / "pseudo_upsampled.pgm");

        double winner_score = 0.0;
        nlohmann::json kept = nlohmann::json::array();
        nlohmann::json scores = nlohmann::json::array();
        for (std::size_t s = 0; s < vote.kept.size(); ++s) {
          kept.push_back(vote.kept[s]);
          scores.push_back(vote.scores[s]);
          if (vote.kept[s] == vote.winner) winner_score = vote.scores[s];
        }
        detail::write_json(
            dir / "pseudo.json",
            {{"image", image.name},
             {"root_seed", config.seed},
             {"image_seed", image_seed},
             {"sources", sources},
             {"ks", config.ks},
             {"grid", {pool.grid_h, pool.grid_w}},
             {"pool_size", pool.size()},
             {"kept", kept},
             {"scores", scores},
             {"tie", vote.tie},
             {"winner",
              {{"pool_index", vote.winner},
               {"source", origin.source},
               {"k", origin.k},
               {"cluster", origin.cluster},
               {"score", winner_score},
               {"file", "pseudo.pgm"}}}});
      });
}

/// `evaluate`: score matching prediction/ground-truth mask pairs and
/// write a JSON report (optionally CSV). Predictions are upsampled to
/// the ground-truth resolution when the shapes differ.
inline int run_evaluate(const EvalConfig& config) {
  if (config.pred_dir.empty() || config.gt_dir.empty() || config.out.empty())
    throw parameter_error("--pred, --gt and --out are required");
  auto list_pgms = [](const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
      throw io_error("not a directory: " + dir.string());
    std::set<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".pgm")
        names.insert(entry.path().filename().string());
    return names;
  };

  const std::set<std::string> preds = list_pgms(config.pred_dir);
  const std::set<std::string> gts = list_pgms(config.gt_dir);
  std::vector<std::string> matched, missing_gt, missing_pred;
  std::set_intersection(preds.begin(), preds.end(), gts.begin(), gts.end(),
                        std::back_inserter(matched));
  std::set_difference(preds.begin(), preds.end(), gts.begin(), gts.end(),
                      std::back_inserter(missing_gt));
  std::set_difference(gts.begin(), gts.end(), preds.begin(), preds.end(),
                      std::back_inserter(missing_pred));
  if (matched.empty())
    throw parameter_error(
        "no mask filenames shared between prediction and ground truth "
        "directories");

  std::vector<ImageEval> rows;
  for (const std::string& name : matched) {
    BinaryMask pred = read_mask(config.pred_dir / name);
    const BinaryMask gt = read_mask(config.gt_dir / name);
    if (pred.height != gt.height || pred.width != gt.width)
      pred = resize_mask_nearest(pred, gt.height, gt.width);
    SoftMask soft;
    soft.height = pred.height;
    soft.width = pred.width;
    soft.values.resize(pred.bits.size());
    for (std::size_t i = 0; i < pred.bits.size(); ++i)
      soft.values[i] = pred.bits[i] ? 1.0 : 0.0;

    ImageEval row;
    row.name = std::filesystem::path(name).stem().string();
    row.iou = iou(pred, gt);
    row.accuracy = accuracy(pred, gt);
    row.max_f_beta = max_f_beta(soft, gt);
    rows.push_back(std::move(row));
  }
  const EvalReport report = make_report(std::move(rows));

  std::filesystem::create_directories(config.out);
  nlohmann::json images = nlohmann::json::array();
  for (const ImageEval& row : report.rows)
    images.push_back({{"name", row.name},
                      {"iou", row.iou},
                      {"accuracy", row.accuracy},
                      {"max_f_beta", row.max_f_beta}});
  detail::write_json(config.out / "report.json",
                     {{"images", images},
                      {"count", report.rows.size()},
                      {"mean_iou", report.mean_iou},
                      {"mean_accuracy", report.mean_accuracy},
                      {"mean_max_f_beta", report.mean_max_f_beta},
                      {"missing_gt", missing_gt},
                      {"missing_pred", missing_pred}});

  if (config.write_csv) {
    std::string csv = "name,iou,accuracy,max_f_beta\n";
    char line[256];
    for (const ImageEval& row : report.rows) {
      std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g\n",
                    row.name.c_str(), row.iou, row.accuracy, row.max_f_beta);
      csv += line;
    }
    std::snprintf(line, sizeof line, "mean,%.17g,%.17g,%.17g\n",
                  report.mean_iou, report.mean_accuracy,
                  report.mean_max_f_beta);
    csv += line;
    detail::write_file_atomic(config.out / "report.csv", csv);
  }

  const std::size_t unmatched = missing_gt.size() + missing_pred.size();
  if (unmatched > 0) {
    std::fprintf(stderr, "[evaluate] %zu unmatched mask files%s\n", unmatched,
                 config.allow_missing ? " (allowed)" : "");
    if (!config.allow_missing) return 1;
  }
  return 0;
}

/// `loss-check`: run the gradient verification suite and print the
/// worst deviation per loss. Exit 0 only if everything stayed within
/// tolerance.
inline int run_loss_check(std::uint64_t seed, int trials, double step = 1e-5,
                          double tol = 1e-6, double inject_bias = 0.0) {
  const GradCheckReport report =
      run_gradient_checks(seed, trials, step, tol, inject_bias);
  auto show = [&](const char* name, const GradStats& stats) {
    std::printf("%s: max_deviation=%.6e checks=%ld failures=%ld\n", name,
                stats.max_error, stats.checks, stats.failures);
  };
  show("dice", report.dice);
  show("ranking", report.ranking);
  show("total", report.total);
  std::printf("%s (tolerance %.1e, %d trials, seed %llu)\n",
              report.passed() ? "PASS" : "FAIL", tol, trials,
              static_cast<unsigned long long>(seed));
  return report.passed() ? 0 : 1;
}

}  // namespace specvote
