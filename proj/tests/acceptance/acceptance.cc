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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Pass a list of criterion numbers to
// run a subset, e.g. `acvc_acceptance 1 2 9`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acvc/cli.hpp"
#include "support/fixtures.hpp"

namespace acvc {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Fourier correctness

Outcome fourier_correctness() {
  std::mt19937_64 gen(1);
  double worst_roundtrip = 0.0, worst_parseval = 0.0, worst_identity = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 8 + static_cast<int>(gen() % 57), w = 8 + static_cast<int>(gen() % 57);
    const ImageBuffer img = testing::random_image(h, w, gen());
    const Spectrum spec = forward_dft(img);
    const auto raw = inverse_dft_raw(spec);
    for (int c = 0; c < kChannels; ++c) {
      const auto ch = img.channel(c);
      double spatial = 0.0, spectral = 0.0;
      for (std::size_t i = 0; i < ch.size(); ++i) {
        worst_roundtrip = std::max(worst_roundtrip, std::abs(raw[c][i] - ch[i]));
        spatial += ch[i] * ch[i];
        spectral += std::norm(spec.planes[c][i]);
      }
      worst_parseval = std::max(worst_parseval, std::abs(spectral / (h * w) - spatial) / spatial);
    }
    const ImageBuffer alpha_one = phase_scaling_alpha(img, 1.0);
    const ImageBuffer d_zero = high_pass_radius_filter(img, 0.0);
    for (std::size_t i = 0; i < img.values().size(); ++i)
      worst_identity = std::max({worst_identity, std::abs(alpha_one.values()[i] - img.values()[i]),
                                 std::abs(d_zero.values()[i] - img.values()[i])});
  }
  return {worst_roundtrip < 1e-6 && worst_parseval < 1e-6 && worst_identity < 1e-4,
          fmt("roundtrip %.2e, parseval %.2e, identities %.2e", worst_roundtrip, worst_parseval,
              worst_identity)};
}

// ---------------------------------------------------------------------------
// 2. Severity-table fidelity

Outcome severity_fidelity() {
  const double alpha[] = {0.9, 0.8, 0.7, 0.6, 0.5};
  const double beta[] = {0.95, 0.9, 0.85, 0.8, 0.75};
  const double frac[] = {0.01, 0.02, 0.03, 0.04, 0.05};
  bool ok = true;
  const SeverityTable table = resolve_severity_table();
  for (int level = 1; level <= 5; ++level) {
    const auto s = fourier_severity(level);
    ok = ok && s.alpha == alpha[level - 1] && s.beta == beta[level - 1] &&
         s.d_fraction == frac[level - 1];
    ok = ok && table.param(CorruptionKind::phase_scaling, level, "alpha") == alpha[level - 1];
    ok = ok && table.param(CorruptionKind::constant_amplitude, level, "beta") == beta[level - 1];
    ok = ok && table.param(CorruptionKind::high_pass, level, "d_fraction") == frac[level - 1];
  }
  const double d = high_pass_radius(224, 224, 5);
  ok = ok && std::abs(d - 11.2) < 1e-12;
  return {ok, fmt("levels exact, d(224, level 5) = %.12g", d)};
}

// ---------------------------------------------------------------------------
// 3. Corruption contract suite

Outcome corruption_contract() {
  const auto images = testing::fixture_images();
  constexpr int kSeeds = 20;
  std::string failures;
  int failed = 0;
  for (CorruptionKind kind : all_kinds()) {
    const bool deterministic = is_deterministic(kind);
    const int seeds = deterministic ? 1 : kSeeds;
    std::vector<double> mean_rmse(5, 0.0);
    bool kind_ok = true;
    std::vector<std::vector<double>> per_image(images.size(), std::vector<double>(5, 0.0));
    for (int level = 1; level <= 5; ++level)
      for (std::size_t i = 0; i < images.size(); ++i)
        for (int seed = 0; seed < seeds; ++seed) {
          Rng a = SeedPolicy{static_cast<std::uint64_t>(seed)}.stream(level, i);
          Rng b = SeedPolicy{static_cast<std::uint64_t>(seed)}.stream(level, i);
          const ImageBuffer out = apply({kind, level}, images[i], a);
          if (!out.same_shape(images[i]) || !(apply({kind, level}, images[i], b) == out))
            kind_ok = false;
          for (double v : out.values())
            if (!(v >= 0.0 && v <= 1.0)) kind_ok = false;
          if (deterministic) {
            Rng other(12345);
            if (!(apply({kind, level}, images[i], other) == out)) kind_ok = false;
          }
          per_image[i][static_cast<std::size_t>(level - 1)] += rmse(out, images[i]) / seeds;
        }
    // Monotone expected distortion per fixture image: nondecreasing for
    // deterministic kinds, within 2% for stochastic ones.
    const double slack = deterministic ? 0.0 : 0.02;
    for (std::size_t i = 0; i < images.size(); ++i)
      for (int l = 1; l < 5; ++l)
        if (per_image[i][static_cast<std::size_t>(l)] <
            per_image[i][static_cast<std::size_t>(l - 1)] * (1.0 - slack) - 1e-12) {
          kind_ok = false;
          failures += fmt(" %s[img %zu, L%d->L%d]", std::string(name_of(kind)).c_str(), i, l, l + 1);
        }
    if (!kind_ok) ++failed;
  }
  return {failed == 0, fmt("22 kinds x 5 levels x 10 images, %d kinds failing", failed) + failures};
}

// ---------------------------------------------------------------------------
// 4. Loss oracle equivalence

double oracle_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) acc += p[i] * (std::log(std::max(p[i], 1e-12)) - std::log(std::max(q[i], 1e-12)));
  return acc;
}

double oracle_jsd(const std::vector<double>& p, const std::vector<double>& q) {
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * oracle_kl(p, m) + 0.5 * oracle_kl(q, m);
}

Outcome loss_oracles() {
  std::mt19937_64 gen(4);
  std::exponential_distribution<double> e;
  auto simplex = [&](int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double s = 0.0;
    for (double& x : v) s += x = e(gen);
    for (double& x : v) x /= s;
    return v;
  };
  auto as_vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int s = 2 + trial % 7, classes = 2 + trial % 4, label = trial % classes;
    CamSet a, b;
    a.maps.resize(classes, s);
    b.maps.resize(classes, s);
    std::vector<std::vector<double>> ra, rb;
    for (int c = 0; c < classes; ++c) {
      ra.push_back(simplex(s));
      rb.push_back(simplex(s));
      a.maps.row(c) = as_vec(ra.back()).transpose();
      b.maps.row(c) = as_vec(rb.back()).transpose();
    }
    worst = std::max(worst, std::abs(loss_cam(a, b, label) - oracle_jsd(ra[label], rb[label])));
    const auto pa = simplex(classes), pb = simplex(classes);
    worst = std::max(worst, std::abs(loss_pred_jsd(as_vec(pa), as_vec(pb)) - oracle_jsd(pa, pb)));
    worst = std::max(worst, std::abs(loss_ce(as_vec(pa), as_vec(pb), label) +
                                     std::log(pa[label]) + std::log(pb[label])));
    const int neg_class = (label + 1) % classes;
    const std::vector<double> u(static_cast<std::size_t>(s), 1.0 / s);
    worst = std::max(worst, std::abs(loss_neg(a, b, NegativeSet{{neg_class}}) -
                                     oracle_kl(u, ra[neg_class]) - oracle_kl(u, rb[neg_class])));
  }
  CamSet one_hot, half, skew;
  one_hot.maps = (Matrix(1, 2) << 1.0, 0.0).finished();
  half.maps = (Matrix(1, 2) << 0.5, 0.5).finished();
  skew.maps = (Matrix(2, 2) << 0.5, 0.5, 0.75, 0.25).finished();
  const double jsd = loss_cam(one_hot, half, 0);
  const double neg = loss_neg(skew, skew, NegativeSet{{1}});
  const bool ok = worst < 1e-12 && std::abs(jsd - 0.215762) < 5e-7 && std::abs(neg - 0.287682) < 5e-7;
  return {ok, fmt("max |lib - oracle| %.2e over 1000 instances, JSD %.6f, NEG %.6f", worst, jsd, neg)};
}

// ---------------------------------------------------------------------------
// 5. Gradient verification

Outcome gradient_verification() {
  const ConsistencyMode modes[] = {ConsistencyMode::cam_jsd, ConsistencyMode::cam_mse,
                                   ConsistencyMode::pred_jsd, ConsistencyMode::neg_only,
                                   ConsistencyMode::none};
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n;
  double loss_level = 0.0;
  for (ConsistencyMode mode : modes)
    for (int trial = 0; trial < 50; ++trial) {
      const int ch = 1 + static_cast<int>(gen() % 4), s = 2 + static_cast<int>(gen() % 5),
                classes = 2 + static_cast<int>(gen() % 3);
      FeatureMap fa{Matrix(ch, s)}, fb{Matrix(ch, s)};
      Classifier w{Matrix(ch, classes)};
      for (Matrix* m : {&fa.values, &fb.values, &w.weights})
        for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = n(gen);
      const int label = static_cast<int>(gen() % classes);
      ObjectiveConfig cfg;
      cfg.mode = mode;
      cfg.lambda = 0.5;
      const auto g = objective_gradients(fa, fb, w, label, cfg);
      double err = 0.0, scale = 1e-12;
      auto check = [&](Matrix& m, const Matrix& analytic) {
        for (Eigen::Index i = 0; i < m.size(); ++i) {
          const double keep = m.data()[i];
          m.data()[i] = keep + 1e-4;
          const double up = objective_gradients(fa, fb, w, label, cfg, false).report.total;
          m.data()[i] = keep - 1e-4;
          const double down = objective_gradients(fa, fb, w, label, cfg, false).report.total;
          m.data()[i] = keep;
          err = std::max(err, std::abs((up - down) / 2e-4 - analytic.data()[i]));
          scale = std::max(scale, std::abs(analytic.data()[i]));
        }
      };
      check(fa.values, g.d_features_clean);
      check(fb.values, g.d_features_corrupt);
      check(w.weights, g.d_weights);
      loss_level = std::max(loss_level, err / scale);
    }

  double network = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto net = TinyConvNet<double>::initialized(3, 1000 + trial);
    net.conv1_bias().setConstant(0.05);
    net.conv2_bias().setConstant(0.05);
    const ImageBuffer a = testing::random_image(8, 8, 10 * trial), b = testing::random_image(8, 8, 10 * trial + 1);
    const ImageBuffer c = testing::random_image(8, 8, 10 * trial + 2), d = testing::random_image(8, 8, 10 * trial + 3);
    const std::vector<TrainingPair> batch{{&a, &b, trial % 3}, {&c, &d, (trial + 2) % 3}};
    ObjectiveConfig cfg;
    cfg.mode = modes[trial % 5];
    cfg.lambda = 0.5;
    const BatchGradient g = backward(net, batch, cfg);
    double err = 0.0, scale = 1e-12;
    auto& p = net.parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double keep = p[i];
      p[i] = keep + 1e-6;
      const double up = batch_loss(net, batch, cfg);
      p[i] = keep - 1e-6;
      const double down = batch_loss(net, batch, cfg);
      p[i] = keep;
      err = std::max(err, std::abs((up - down) / 2e-6 - g.grad[static_cast<std::size_t>(i)]));
      scale = std::max(scale, std::abs(g.grad[static_cast<std::size_t>(i)]));
    }
    network = std::max(network, err / scale);
  }
  return {loss_level < 1e-4 && network < 1e-3,
          fmt("loss level %.2e (250 instances), network %.2e (20 instances)", loss_level, network)};
}

// ---------------------------------------------------------------------------
// 6. Training determinism

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome training_determinism() {
  testing::TempDir dir("determinism");
  std::string files[2][2];
  for (int run = 0; run < 2; ++run) {
    const auto out_dir = dir / ("run" + std::to_string(run));
    std::ofstream(dir / "cfg.txt") << "# default schedule\noutput_dir = " << out_dir.string() << "\n";
    std::ostringstream out, err;
    if (cli::run_train({(dir / "cfg.txt").string(), ""}, out, err) != cli::kExitOk)
      return {false, "train failed: " + err.str()};
    files[run][0] = slurp(out_dir / "model.bin");
    files[run][1] = slurp(out_dir / "metrics.log");
  }
  const bool ok = !files[0][0].empty() && files[0][0] == files[1][0] && files[0][1] == files[1][1];
  return {ok, fmt("default config twice: model %zu bytes %s, metrics log %s", files[0][0].size(),
                  files[0][0] == files[1][0] ? "identical" : "DIFFERENT",
                  files[0][1] == files[1][1] ? "identical" : "DIFFERENT")};
}

// ---------------------------------------------------------------------------
// 7. Directional effect on the synthetic benchmark

// The frozen desk-scale schedule shared by all three variants.
TrainConfig desk_config() {
  TrainConfig cfg;
  cfg.epochs = 90;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.03;
  cfg.lr_drop_epoch = 72;
  return cfg;
}

constexpr std::uint64_t kDeskBenchmarkSeed = 7;

Outcome directional_effect() {
  const SyntheticDGBench bench = make_benchmark(kDeskBenchmarkSeed);
  double mean[3] = {0, 0, 0};
  std::string detail;
  const char* names[3] = {"baseline", "vc", "acvc"};
  for (int variant = 0; variant < 3; ++variant) {
    std::vector<double> accs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      TrainConfig cfg = desk_config();
      cfg.global_seed = seed;
      cfg.corrupt = variant > 0;
      cfg.mode = variant == 2 ? ConsistencyMode::cam_jsd : ConsistencyMode::none;
      const TrainResult r = train(bench.train, cfg);
      const double acc = 0.5 * (evaluate(r.net, bench.target_outline).accuracy +
                                evaluate(r.net, bench.target_inverted).accuracy);
      accs.push_back(100.0 * acc);
      mean[variant] += 100.0 * acc / 5.0;
    }
    double var = 0.0;
    for (double a : accs) var += (a - mean[variant]) * (a - mean[variant]) / 4.0;
    detail += fmt("%s %.2f +- %.2f; ", names[variant], mean[variant], std::sqrt(var));
  }
  const bool ok = mean[1] >= mean[0] + 5.0 && mean[2] >= mean[1] - 1.0 && mean[2] > mean[0] + 5.0;
  return {ok, detail + "need vc >= baseline + 5, acvc >= vc - 1, acvc > baseline + 5"};
}

// ---------------------------------------------------------------------------
// 8. Ablation machinery

Outcome ablation_smoke() {
  const SyntheticDGBench bench = make_benchmark(2, {30, 6, 3});
  const ConsistencyMode modes[] = {ConsistencyMode::cam_jsd, ConsistencyMode::cam_mse,
                                   ConsistencyMode::pred_jsd, ConsistencyMode::neg_only,
                                   ConsistencyMode::none};
  std::set<std::string> decompositions;
  bool ok = true;
  std::string problems;
  for (ConsistencyMode mode : modes) {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 10;
    cfg.learning_rate = 0.01;
    cfg.mode = mode;
    const TrainResult r = train(bench.train, cfg, &bench.source_val);
    const EpochMetrics& m = r.log.back();
    const bool active_cam = mode == ConsistencyMode::cam_jsd || mode == ConsistencyMode::cam_mse ||
                            mode == ConsistencyMode::pred_jsd;
    const bool active_neg = mode == ConsistencyMode::cam_jsd || mode == ConsistencyMode::neg_only;
    if ((m.cam > 0.0) != active_cam || (m.neg > 0.0) != active_neg ||
        std::abs(m.train_loss - (m.ce + cfg.lambda * (m.cam + m.neg))) > 1e-9) {
      ok = false;
      problems += fmt(" bad decomposition for %s;", std::string(name_of(mode)).c_str());
    }
    decompositions.insert(format_metrics_line(m));
  }
  ok = ok && decompositions.size() == 5;
  for (const char* pool : {"weather", "blur", "noise", "digital", "fourier", "imagenet_c", "vc"}) {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 10;
    cfg.pool = pool;
    try {
      const TrainResult r = train(bench.train, cfg);
      if (!std::isfinite(r.log.back().train_loss)) throw DomainError("non-finite loss");
    } catch (const std::exception& e) {
      ok = false;
      problems += fmt(" pool %s: %s;", pool, e.what());
    }
  }
  return {ok, fmt("5 modes, 7 pools, %zu distinct decompositions", decompositions.size()) + problems};
}

// ---------------------------------------------------------------------------
// 9. Temperature properties

Outcome temperature_properties() {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 1.5);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int ch = 1 + trial % 4, s = 4 + trial % 13, classes = 1 + trial % 3;
    FeatureMap f{Matrix(ch, s)};
    Classifier w{Matrix(ch, classes)};
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values.data()[i] = n(gen);
    for (Eigen::Index i = 0; i < w.weights.size(); ++i) w.weights.data()[i] = n(gen);
    std::vector<Eigen::Index> arg(static_cast<std::size_t>(classes), -1);
    std::vector<double> previous(static_cast<std::size_t>(classes), 2.0);
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const CamSet cam = compute_cam(f, w, t);
      for (int c = 0; c < classes; ++c) {
        Eigen::Index a;
        const double mx = cam.maps.row(c).maxCoeff(&a);
        auto& first = arg[static_cast<std::size_t>(c)];
        if (first < 0) first = a;
        if (a != first || mx > previous[static_cast<std::size_t>(c)]) ++violations;
        previous[static_cast<std::size_t>(c)] = mx;
      }
    }
  }
  return {violations == 0, fmt("200 instances, T in {0.25, 0.5, 1, 2, 4}, %d violations", violations)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace acvc

int main(int argc, char** argv) {
  using namespace acvc;
  const std::vector<Criterion> criteria{
      {1, "fourier correctness", 30, fourier_correctness},
      {2, "severity table fidelity", 5, severity_fidelity},
      {3, "corruption contract suite", 300, corruption_contract},
      {4, "loss oracle equivalence", 30, loss_oracles},
      {5, "gradient verification", 120, gradient_verification},
      {6, "training determinism", 600, training_determinism},
      {7, "directional effect", 1200, directional_effect},
      {8, "ablation machinery", 300, ablation_smoke},
      {9, "temperature properties", 5, temperature_properties},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1fs of %.0fs]%s\n", pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : " over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
