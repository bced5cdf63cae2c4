/* Copyright 2026 The ACVC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ACVC_CLI_HPP_
#define ACVC_CLI_HPP_

// Command implementations behind tools/acvc. Argument parsing lives in the
// tool; everything here takes plain structs so tests can drive it directly.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "acvc/benchmark.hpp"
#include "acvc/errors.hpp"
#include "acvc/image_io.hpp"
#include "acvc/registry.hpp"
#include "acvc/severity_table.hpp"
#include "acvc/trainer.hpp"

namespace acvc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDomain = 4;

/// Maps the library's error families to process exit codes.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ShapeError*>(&e))
    return kExitDomain;
  return kExitDomain;
}

// Runs `body`, printing any error to `err` and returning its exit code.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

// ---------------------------------------------------------------------------
// Run configuration: flat `key = value` lines, `#` starts a comment.

struct RunConfig {
  TrainConfig train;
  std::uint64_t benchmark_seed = 0;
  BenchmarkSizes sizes;
  std::string output_dir = "acvc_run";
  std::string severity_table;  // empty: default resolution order
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
}

inline std::string number(double v) { return SeverityTable::format_number(v); }

}  // namespace detail

/// Applies one key. Unknown keys are rejected.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_value;
  TrainConfig& t = cfg.train;
  if (key == "epochs") t.epochs = parse_value<int>(key, value);
  else if (key == "batch_size") t.batch_size = parse_value<int>(key, value);
  else if (key == "learning_rate") t.learning_rate = parse_value<double>(key, value);
  else if (key == "momentum") t.momentum = parse_value<double>(key, value);
  else if (key == "lr_drop_epoch") t.lr_drop_epoch = parse_value<int>(key, value);
  else if (key == "lr_drop_factor") t.lr_drop_factor = parse_value<double>(key, value);
  else if (key == "lambda") t.lambda = parse_value<double>(key, value);
  else if (key == "k") t.k = parse_value<int>(key, value);
  else if (key == "temperature") t.temperature = parse_value<double>(key, value);
  else if (key == "pool") t.pool = value;
  else if (key == "mode") {
    try {
      t.mode = parse_consistency_mode(value);
    } catch (const DomainError& e) {
      throw ConfigError("config key 'mode': " + std::string(e.what()));
    }
  } else if (key == "global_seed") t.global_seed = parse_value<std::uint64_t>(key, value);
  else if (key == "corrupt") t.corrupt = detail::parse_bool(key, value);
  else if (key == "benchmark_seed") cfg.benchmark_seed = parse_value<std::uint64_t>(key, value);
  else if (key == "train_size") cfg.sizes.train = parse_value<int>(key, value);
  else if (key == "val_size") cfg.sizes.source_val = parse_value<int>(key, value);
  else if (key == "target_size") cfg.sizes.target_test = parse_value<int>(key, value);
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "severity_table") cfg.severity_table = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

inline void validate(const RunConfig& cfg) {
  cfg.train.validate();
  auto check_size = [](const char* key, int n) {
    if (n < kShapeClassCount || n % kShapeClassCount != 0)
      throw ConfigError(std::string("config key '") + key + "': must be a positive multiple of 3");
  };
  check_size("train_size", cfg.sizes.train);
  check_size("val_size", cfg.sizes.source_val);
  check_size("target_size", cfg.sizes.target_test);
  if (cfg.output_dir.empty()) throw ConfigError("config key 'output_dir': must not be empty");
}

inline RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    set_config_value(cfg, detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)));
  }
  validate(cfg);
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

/// Every key with its effective value; parse_run_config() of this text
/// reproduces the configuration exactly.
inline std::string format_run_config(const RunConfig& cfg) {
  using detail::number;
  const TrainConfig& t = cfg.train;
  std::ostringstream out;
  out << "epochs = " << t.epochs << "\n"
      << "batch_size = " << t.batch_size << "\n"
      << "learning_rate = " << number(t.learning_rate) << "\n"
      << "momentum = " << number(t.momentum) << "\n"
      << "lr_drop_epoch = " << t.lr_drop_epoch << "\n"
      << "lr_drop_factor = " << number(t.lr_drop_factor) << "\n"
      << "lambda = " << number(t.lambda) << "\n"
      << "k = " << t.k << "\n"
      << "temperature = " << number(t.temperature) << "\n"
      << "pool = " << t.pool << "\n"
      << "mode = " << name_of(t.mode) << "\n"
      << "global_seed = " << t.global_seed << "\n"
      << "corrupt = " << (t.corrupt ? "true" : "false") << "\n"
      << "benchmark_seed = " << cfg.benchmark_seed << "\n"
      << "train_size = " << cfg.sizes.train << "\n"
      << "val_size = " << cfg.sizes.source_val << "\n"
      << "target_size = " << cfg.sizes.target_test << "\n"
      << "output_dir = " << cfg.output_dir << "\n"
      << "severity_table = " << cfg.severity_table << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Model files.
//
//   bytes 0-7   magic "ACVCNET\0"
//   u32         format version (1)
//   u32         class count
//   u64         parameter count
//   f64 x N     parameters, flat layout of TinyConvNet
//   u64         checksum: FNV-1a over the parameter bytes, xor parameter count
// All integers and floats are little-endian.

inline constexpr char kModelMagic[8] = {'A', 'C', 'V', 'C', 'N', 'E', 'T', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "model files are written in native little-endian order");

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos, const std::string& name) {
  if (pos + sizeof(T) > in.size()) throw DecodeError("model file '" + name + "' is truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::string encode_model(const TrainNet& net) {
  std::string params;
  for (Eigen::Index i = 0; i < net.parameters().size(); ++i)
    detail::put<double>(params, static_cast<double>(net.parameters()[i]));
  std::string out(kModelMagic, sizeof kModelMagic);
  detail::put<std::uint32_t>(out, kModelVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(net.class_count()));
  detail::put<std::uint64_t>(out, net.parameter_count());
  out += params;
  detail::put<std::uint64_t>(out, detail::fnv1a(params) ^ net.parameter_count());
  return out;
}

inline TrainNet decode_model(const std::string& bytes, const std::string& name = "<memory>") {
  if (bytes.size() < sizeof kModelMagic ||
      std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0)
    throw DecodeError("'" + name + "' is not a model file");
  std::size_t pos = sizeof kModelMagic;
  const auto version = detail::take<std::uint32_t>(bytes, pos, name);
  if (version != kModelVersion)
    throw DecodeError("model file '" + name + "' has unsupported version " +
                      std::to_string(version));
  const auto classes = detail::take<std::uint32_t>(bytes, pos, name);
  const auto count = detail::take<std::uint64_t>(bytes, pos, name);
  if (classes < 1 || classes > 4096 || count != TrainNet::count_for(static_cast<int>(classes)))
    throw DecodeError("model file '" + name + "' has an inconsistent header");
  if (bytes.size() != pos + count * sizeof(double) + sizeof(std::uint64_t))
    throw DecodeError("model file '" + name + "' has the wrong length");
  const std::string params = bytes.substr(pos, count * sizeof(double));
  TrainNet net(static_cast<int>(classes));
  for (std::uint64_t i = 0; i < count; ++i)
    net.parameters()[static_cast<Eigen::Index>(i)] =
        static_cast<float>(detail::take<double>(bytes, pos, name));
  const auto checksum = detail::take<std::uint64_t>(bytes, pos, name);
  if (checksum != (detail::fnv1a(params) ^ count))
    throw DecodeError("model file '" + name + "' fails its checksum");
  return net;
}

inline void save_model(const TrainNet& net, const std::filesystem::path& path) {
  const std::string bytes = encode_model(net);
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write model '" + path.string() + "'");
}

inline TrainNet load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return decode_model(buffer.str(), path.string());
}

// ---------------------------------------------------------------------------
// corrupt

/// Severity argument: a fixed level, or nullopt for "random".
inline std::optional<int> parse_severity(const std::string& text) {
  if (text == "random") return std::nullopt;
  int level = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), level);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() ||
      level < 1 || level > 5)
    throw DomainError("severity must be 1..5 or 'random', got '" + text + "'");
  return level;
}

/// The corruption applied to file number `index` of a corrupt run. The kind
/// is drawn from `pool` (trivially when it has one member) and the level is
/// drawn only when no fixed level is given.
inline CorruptionSpec choose_spec(std::span<const CorruptionKind> pool,
                                  std::optional<int> level, Rng& rng) {
  CorruptionSpec spec = sample_corruption(pool, rng);
  if (level) spec.level = *level;
  return spec;
}

inline Rng file_stream(std::uint64_t seed, std::uint64_t index) {
  return SeedPolicy{seed}.stream(0, index);
}

struct CorruptArgs {
  std::string input;
  std::string op;
  std::string severity = "random";
  std::uint64_t seed = 0;
  std::string output;
  std::string severity_table;
};

inline std::vector<std::filesystem::path> list_inputs(const std::filesystem::path& input) {
  namespace fs = std::filesystem;
  if (!fs::exists(input)) throw IoError("input '" + input.string() + "' does not exist");
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.is_regular_file() && is_image_path(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no PNG or JPEG files in '" + input.string() + "'");
  } else {
    files.push_back(input);
  }
  return files;
}

/// Output name: input stem + `_<kind>_s<level>` + input extension.
inline std::filesystem::path corrupted_name(const std::filesystem::path& input,
                                            const CorruptionSpec& spec) {
  return input.stem().string() + "_" + to_string(spec) + input.extension().string();
}

inline int run_corrupt(const CorruptArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    namespace fs = std::filesystem;
    const SeverityTable table = resolve_severity_table(args.severity_table);
    const std::vector<CorruptionKind> pool = pool_for(args.op);
    const std::optional<int> level = parse_severity(args.severity);
    const auto files = list_inputs(args.input);
    fs::create_directories(args.output);
    for (std::size_t i = 0; i < files.size(); ++i) {
      Rng rng = file_stream(args.seed, i);
      const CorruptionSpec spec = choose_spec(pool, level, rng);
      const ImageBuffer img = load_image(files[i]);
      const fs::path target = fs::path(args.output) / corrupted_name(files[i], spec);
      save_image(apply(spec, img, rng, table), target);
      out << files[i].string() << " -> " << target.string() << "\n";
    }
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// grid

/// One row per kind: the clean image followed by severities 1..5.
inline ImageBuffer make_grid(const ImageBuffer& img, std::span<const CorruptionKind> kinds,
                             std::uint64_t seed, const SeverityTable& table) {
  const int h = img.height(), w = img.width();
  const int rows = static_cast<int>(kinds.size());
  if (rows == 0) throw DomainError("grid needs at least one corruption kind");
  std::vector<double> planes(static_cast<std::size_t>(kChannels) * rows * h * 6 * w);
  const int grid_w = 6 * w, grid_h = rows * h;
  auto blit = [&](const ImageBuffer& tile, int row, int col) {
    for (int c = 0; c < kChannels; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          planes[(static_cast<std::size_t>(c) * grid_h + row * h + y) * grid_w + col * w + x] =
              tile.at(c, y, x);
  };
  const SeedPolicy policy{seed};
  for (int r = 0; r < rows; ++r) {
    blit(img, r, 0);
    for (int level = 1; level <= 5; ++level) {
      Rng rng = policy.stream(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(level));
      blit(apply({kinds[static_cast<std::size_t>(r)], level}, img, rng, table), r, level);
    }
  }
  return ImageBuffer(grid_h, grid_w, std::move(planes));
}

struct GridArgs {
  std::string input;
  std::string ops = "vc";
  std::string output;
  std::uint64_t seed = 0;
  std::string severity_table;
};

inline int run_grid(const GridArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SeverityTable table = resolve_severity_table(args.severity_table);
    const std::vector<CorruptionKind> kinds = pool_for(args.ops);
    const ImageBuffer img = load_image(args.input);
    const ImageBuffer grid = make_grid(img, kinds, args.seed, table);
    save_image(grid, args.output);
    out << args.output << ": " << kinds.size() << " x 6 tiles, " << grid.height() << "x"
        << grid.width() << " pixels\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// train / eval

struct TrainArgs {
  std::string config;
  std::string severity_table;  // overrides the config file's value when set
};

inline int run_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    namespace fs = std::filesystem;
    RunConfig cfg = load_run_config(args.config);
    if (!args.severity_table.empty()) cfg.severity_table = args.severity_table;
    const SeverityTable table = resolve_severity_table(cfg.severity_table);
    const std::string snapshot = format_run_config(cfg);
    out << "# resolved config\n" << snapshot;

    const SyntheticDGBench bench = make_benchmark(cfg.benchmark_seed, cfg.sizes);
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    {
      std::ofstream f(dir / "config.resolved");
      f << snapshot;
      if (!f) throw IoError("cannot write '" + (dir / "config.resolved").string() + "'");
    }
    out << "# epoch train_loss ce cam neg source_val_acc\n";
    const TrainResult result =
        train(bench.train, cfg.train, &bench.source_val, table,
              [&out](const EpochMetrics& m) { out << format_metrics_line(m) << "\n" << std::flush; });
    save_model(result.net, dir / "model.bin");
    std::ofstream log(dir / "metrics.log");
    log << format_metrics_log(result.log);
    if (!log) throw IoError("cannot write '" + (dir / "metrics.log").string() + "'");
    out << "wrote " << (dir / "model.bin").string() << "\n";
    return kExitOk;
  });
}

/// Images under <dir>/<class>/ where <class> is a class index or one of
/// disk, triangle, cross.
inline Dataset load_directory_dataset(const std::filesystem::path& root, int class_count) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError("'" + root.string() + "' is not a directory");
  static const std::map<std::string, int> kNames{{"disk", 0}, {"triangle", 1}, {"cross", 2}};
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  std::vector<LabeledSample> samples;
  for (const auto& dir : class_dirs) {
    const std::string name = dir.filename().string();
    int label = -1;
    if (auto it = kNames.find(name); it != kNames.end()) {
      label = it->second;
    } else {
      auto res = std::from_chars(name.data(), name.data() + name.size(), label);
      if (res.ec != std::errc{} || res.ptr != name.data() + name.size()) label = -1;
    }
    if (label < 0 || label >= class_count)
      throw DomainError("class directory '" + dir.string() + "' does not name a class");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && is_image_path(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) samples.push_back({load_image(f), label});
  }
  if (samples.empty()) throw IoError("no labelled images under '" + root.string() + "'");
  return Dataset(root.filename().string(), class_count, std::move(samples));
}

struct EvalArgs {
  std::string model;
  std::vector<std::string> data;  // empty: every builtin target
  std::uint64_t benchmark_seed = 0;
  int target_size = BenchmarkSizes{}.target_test;
  int val_size = BenchmarkSizes{}.source_val;
};

struct EvalRow {
  std::string domain;
  double accuracy = 0.0;
};

inline std::string format_eval_table(const std::vector<EvalRow>& rows, double target_average) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-20s %s\n", "domain", "accuracy");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-20s %.6f\n", r.domain.c_str(), r.accuracy);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-20s %.6f\n", "target_average", target_average);
  out += buf;
  return out;
}

inline int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const TrainNet net = load_model(args.model);
    const std::vector<std::string> wanted =
        args.data.empty() ? std::vector<std::string>{"builtin:target1", "builtin:target2"}
                          : args.data;
    std::optional<SyntheticDGBench> bench;
    auto builtin = [&]() -> const SyntheticDGBench& {
      if (!bench) {
        BenchmarkSizes sizes;
        sizes.train = kShapeClassCount;  // the training split is not needed here
        sizes.source_val = args.val_size;
        sizes.target_test = args.target_size;
        bench = make_benchmark(args.benchmark_seed, sizes);
      }
      return *bench;
    };
    std::vector<EvalRow> rows;
    double target_sum = 0.0;
    int targets = 0;
    std::vector<Dataset> loaded;
    for (const std::string& spec : wanted) {
      const Dataset* data = nullptr;
      if (spec == "builtin:target1") data = &builtin().target_outline;
      else if (spec == "builtin:target2") data = &builtin().target_inverted;
      else if (spec.rfind("builtin:", 0) == 0)
        throw DomainError("unknown builtin dataset '" + spec + "'");
      else data = &loaded.emplace_back(load_directory_dataset(spec, net.class_count()));
      const double acc = evaluate(net, *data).accuracy;
      rows.push_back({data->name(), acc});
      target_sum += acc;
      ++targets;
    }
    if (bench || args.data.empty())
      rows.insert(rows.begin(), {"source_val", evaluate(net, builtin().source_val).accuracy});
    out << format_eval_table(rows, target_sum / targets);
    return kExitOk;
  });
}

}  // namespace acvc::cli

#endif  // ACVC_CLI_HPP_
