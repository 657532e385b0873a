#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vcasir/vcasir.hpp"

namespace vcasir::cli {

namespace fs = std::filesystem;

/// Fixed exit codes: 0 success, 1 input error, 2 internal error.
enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

struct FeatureFlags {
  double alpha = 0.4;
  double beta = 0.6;
  double lambda = 0.5;
  double zone_min = -79.55;
  double zone_max = 79.55;

  void add_to(CLI::App* app) {
    app->add_option("--alpha", alpha, "DR weight of the crossed side")->capture_default_str();
    app->add_option("--beta", beta, "DR weight of the uncrossed side")->capture_default_str();
    app->add_option("--lambda", lambda, "DID weight of the JNDD-ranked statistics")->capture_default_str();
    app->add_option("--zone-min", zone_min, "comfort zone lower bound (px)")->capture_default_str();
    app->add_option("--zone-max", zone_max, "comfort zone upper bound (px)")->capture_default_str();
  }

  ExtractOptions options() const {
    ExtractOptions o;
    o.zone = {zone_min, zone_max};
    o.dr.alpha = alpha;
    o.dr.beta = beta;
    o.did.lambda = lambda;
    o.zone.validate();
    o.dr.validate();
    o.did.validate();
    return o;
  }
};

struct SvrFlags {
  std::string kernel = "rbf";
  double C = 10.0;
  double eps = 0.1;
  std::optional<double> gamma;
  double tol = 1e-3;

  void add_to(CLI::App* app) {
    app->add_option("--kernel", kernel, "rbf or linear")->capture_default_str();
    app->add_option("--C", C, "SVR box constraint")->capture_default_str();
    app->add_option("--eps", eps, "SVR epsilon-tube half width")->capture_default_str();
    app->add_option("--gamma", gamma, "RBF gamma (default 1/feature_dim)");
    app->add_option("--tol", tol, "SMO KKT tolerance")->capture_default_str();
  }

  SvrParams params(std::uint64_t seed) const {
    SvrParams p;
    p.kernel = parse_kernel(kernel);
    p.C = C;
    p.epsilon = eps;
    p.gamma = gamma;
    p.tol = tol;
    p.seed = seed;
    p.validate();
    return p;
  }
};

/// Features of one manifest row; estimates disparity when the row has no map.
inline FeatureVector extract_row(const ManifestRow& row, const ExtractOptions& opts, std::ostream& err) {
  StereoPair pair(load_image(row.left), load_image(row.right));
  std::optional<DisparityMap> dmap;
  if (row.disparity) {
    dmap = load_disparity(*row.disparity);
  } else {
    err << "warning: " << row.id << ": no disparity map, estimating by block matching\n";
    dmap = estimate_fitted(pair, opts.block_match);
  }
  return extract_features(pair, &*dmap, opts, row.fiq);
}

struct BatchResult {
  std::vector<std::optional<FeatureVector>> features;
  std::vector<std::string> errors;  // per row, empty when fine
};

/// Extracts all rows on `threads` workers; results keep manifest order.
inline BatchResult extract_all(const Manifest& m, const ExtractOptions& opts, unsigned threads, std::ostream& err) {
  const std::size_t n = m.rows.size();
  BatchResult res{std::vector<std::optional<FeatureVector>>(n), std::vector<std::string>(n)};
  std::vector<std::ostringstream> logs(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        res.features[i] = extract_row(m.rows[i], opts, logs[i]);
      } catch (const Error& e) {
        res.errors[i] = e.what();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < n; ++i) {
    err << logs[i].str();
    if (!res.errors[i].empty()) err << "error: " << m.rows[i].id << ": " << res.errors[i] << "\n";
  }
  return res;
}

inline std::vector<FeatureSet> parse_feature_sets(const std::vector<std::string>& specs) {
  std::vector<FeatureSet> out;
  for (const auto& s : specs) out.push_back(FeatureSet::parse(s));
  return out;
}

inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string report_table(const std::vector<EvalReport>& reps) {
  std::size_t w = 9;
  for (const auto& r : reps) w = std::max(w, r.features.size());
  std::ostringstream o;
  o << std::left << std::setw(static_cast<int>(w) + 2) << "Algorithm" << std::right << std::setw(8) << "PLCC"
    << std::setw(8) << "SRCC" << std::setw(8) << "KRCC" << std::setw(8) << "RMSE" << "\n";
  for (const auto& r : reps)
    o << std::left << std::setw(static_cast<int>(w) + 2) << r.features << std::right << std::setw(8)
      << fixed4(r.plcc.mean) << std::setw(8) << fixed4(r.srcc.mean) << std::setw(8) << fixed4(r.krcc.mean)
      << std::setw(8) << fixed4(r.rmse.mean) << "\n";
  return o.str();
}

inline CsvTable report_csv(const std::vector<EvalReport>& reps) {
  CsvTable t;
  t.header = {"features", "plcc_mean", "plcc_std", "srcc_mean", "srcc_std", "krcc_mean", "krcc_std",
              "rmse_mean", "rmse_std", "iterations", "skipped", "split", "seed"};
  for (const auto& r : reps)
    t.rows.push_back({r.features, format_real(r.plcc.mean), format_real(r.plcc.std), format_real(r.srcc.mean),
                      format_real(r.srcc.std), format_real(r.krcc.mean), format_real(r.krcc.std),
                      format_real(r.rmse.mean), format_real(r.rmse.std), std::to_string(r.iterations),
                      std::to_string(r.skipped), format_real(r.train_fraction), std::to_string(r.seed)});
  return t;
}

/// Default report rows for the available columns.
inline std::vector<FeatureSet> default_feature_sets(bool have_fiq) {
  using F = FeatureSet;
  std::vector<FeatureSet> out;
  if (have_fiq) out.emplace_back(F::Fiq);
  out.emplace_back(F::Niq);
  out.emplace_back(F::Dr | F::Bd | F::Did);
  if (have_fiq) out.emplace_back(F::Fiq | F::Dr | F::Bd | F::Did);
  out.emplace_back(F::Niq | F::Dr | F::Bd | F::Did);
  return out;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Visual comfort assessment toolkit for retargeted stereoscopic images", "vcasir"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();

  // disparity
  auto* cmd_disp = app.add_subcommand("disparity", "estimate a disparity map or convert between formats");
  std::string d_left, d_right, d_in, d_out;
  int d_window = 4;
  std::vector<int> d_range{-128, 128};
  bool d_subpixel = false;
  double d_scale = 1.0 / 256.0, d_offset = -128.0;
  cmd_disp->add_option("--left", d_left, "left view");
  cmd_disp->add_option("--right", d_right, "right view");
  cmd_disp->add_option("--in", d_in, "existing disparity map to convert (PFM or 16-bit PNG)");
  cmd_disp->add_option("--out", d_out, "output map (.pfm or .png)")->required();
  cmd_disp->add_option("--window", d_window, "window radius (4 = 9x9)")->capture_default_str();
  cmd_disp->add_option("--range", d_range, "search range MIN MAX")->expected(2)->capture_default_str();
  cmd_disp->add_flag("--subpixel", d_subpixel, "parabolic sub-pixel refinement");
  cmd_disp->add_option("--scale", d_scale, "16-bit PNG quantization step")->capture_default_str();
  cmd_disp->add_option("--offset", d_offset, "16-bit PNG offset")->capture_default_str();

  // retarget
  auto* cmd_rt = app.add_subcommand("retarget", "apply one retargeting operator to one pair");
  std::string r_left, r_right, r_disp, r_op = "crop", r_out_left, r_out_right, r_out_disp;
  double r_ratio = 0.7, r_gamma = 1.0;
  int r_width = 0, r_block = 36;
  std::vector<int> r_offsets;
  cmd_rt->add_option("--left", r_left)->required();
  cmd_rt->add_option("--right", r_right)->required();
  cmd_rt->add_option("--disparity", r_disp, "disparity map (estimated when absent)");
  cmd_rt->add_option("--op", r_op, "crop, scale, seam or multi")->capture_default_str();
  cmd_rt->add_option("--ratio", r_ratio, "target width ratio")->capture_default_str();
  cmd_rt->add_option("--width", r_width, "explicit target width (overrides --ratio)");
  cmd_rt->add_option("--offsets", r_offsets, "crop offsets LEFT RIGHT")->expected(2);
  cmd_rt->add_option("--gamma", r_gamma, "seam disparity-gradient weight")->capture_default_str();
  cmd_rt->add_option("--block", r_block, "multi-operator block width")->capture_default_str();
  cmd_rt->add_option("--out-left", r_out_left)->required();
  cmd_rt->add_option("--out-right", r_out_right)->required();
  cmd_rt->add_option("--out-disparity", r_out_disp)->required();

  // synth
  auto* cmd_syn = app.add_subcommand("synth", "build a retargeted corpus with all four operators");
  std::string s_sources, s_out;
  int s_generate = 0;
  std::vector<int> s_size{64, 48};
  SynthOptions s_opts;
  cmd_syn->add_option("--sources", s_sources, "directory of <scene>_L/_R[/_D] files");
  cmd_syn->add_option("--generate", s_generate, "generate N procedural source scenes into OUT/sources");
  cmd_syn->add_option("--size", s_size, "procedural scene size W H")->expected(2)->capture_default_str();
  cmd_syn->add_option("--out", s_out, "output directory")->required();
  cmd_syn->add_option("--ratio", s_opts.ratio, "shrink ratio")->capture_default_str();
  cmd_syn->add_flag("--synthetic-mos", s_opts.synthetic_mos, "emit synthetic (non-human) comfort labels");
  cmd_syn->add_option("--noise", s_opts.mos_noise, "synthetic label noise sigma")->capture_default_str();
  cmd_syn->add_option("--gamma", s_opts.seam_gamma, "seam disparity-gradient weight")->capture_default_str();
  cmd_syn->add_option("--block", s_opts.block_width, "multi-operator block width")->capture_default_str();
  FeatureFlags s_feat;
  s_feat.add_to(cmd_syn);

  // extract
  auto* cmd_ex = app.add_subcommand("extract", "manifest to feature CSV");
  std::string e_manifest, e_out;
  unsigned e_threads = std::max(1u, std::thread::hardware_concurrency());
  FeatureFlags e_feat;
  cmd_ex->add_option("--manifest", e_manifest)->required();
  cmd_ex->add_option("--out", e_out, "feature CSV")->required();
  cmd_ex->add_option("--threads", e_threads, "worker threads");
  e_feat.add_to(cmd_ex);

  // train
  auto* cmd_tr = app.add_subcommand("train", "fit the SVR on features and labels");
  std::string t_features_csv, t_labels, t_manifest, t_out, t_features = "dr,bd,did,niq";
  SvrFlags t_svr;
  cmd_tr->add_option("--feature-csv", t_features_csv, "feature CSV from 'extract'")->required();
  cmd_tr->add_option("--labels", t_labels, "labels CSV (aggregated or raw ratings)");
  cmd_tr->add_option("--manifest", t_manifest, "manifest providing mos_vc when --labels is absent");
  cmd_tr->add_option("--features", t_features, "feature families, e.g. dr,bd,did")->capture_default_str();
  cmd_tr->add_option("--out", t_out, "model file")->required();
  t_svr.add_to(cmd_tr);

  // predict
  auto* cmd_pr = app.add_subcommand("predict", "score feature rows with a trained model");
  std::string p_model, p_features_csv, p_out, p_features = "dr,bd,did,niq";
  cmd_pr->add_option("--model", p_model)->required();
  cmd_pr->add_option("--feature-csv", p_features_csv)->required();
  cmd_pr->add_option("--features", p_features, "families used at training time")->capture_default_str();
  cmd_pr->add_option("--out", p_out, "scores CSV")->required();

  // evaluate
  auto* cmd_ev = app.add_subcommand("evaluate", "repeated random-split cross-validation");
  std::string v_manifest, v_features_csv, v_out;
  std::vector<std::string> v_features;
  std::size_t v_iters = 100;
  double v_split = 0.8;
  bool v_no_group = false;
  unsigned v_threads = std::max(1u, std::thread::hardware_concurrency());
  SvrFlags v_svr;
  FeatureFlags v_feat;
  cmd_ev->add_option("--manifest", v_manifest, "manifest with mos_vc labels")->required();
  cmd_ev->add_option("--feature-csv", v_features_csv, "precomputed features (skips extraction)");
  cmd_ev->add_option("--features", v_features, "feature combination; repeat for several rows");
  cmd_ev->add_option("--iters", v_iters, "iterations")->capture_default_str();
  cmd_ev->add_option("--split", v_split, "training fraction")->capture_default_str();
  cmd_ev->add_flag("--no-group", v_no_group, "split per image instead of per scene");
  cmd_ev->add_option("--out", v_out, "report CSV");
  cmd_ev->add_option("--threads", v_threads, "extraction worker threads");
  v_svr.add_to(cmd_ev);
  v_feat.add_to(cmd_ev);

  // mos
  auto* cmd_mos = app.add_subcommand("mos", "screen subjects and aggregate raw ratings");
  std::string m_ratings, m_out, m_report;
  double m_threshold = 0.7;
  cmd_mos->add_option("--ratings", m_ratings, "id,subject_id,vc[,iq,dq,ov]")->required();
  cmd_mos->add_option("--out", m_out, "MOS CSV")->required();
  cmd_mos->add_option("--threshold", m_threshold, "rejection PLCC threshold")->capture_default_str();
  cmd_mos->add_option("--report", m_report, "screening report file");

  std::vector<const char*> argv{"vcasir"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (cmd_disp->parsed()) {
      DisparityEncoding enc{d_scale, d_offset};
      DisparityMap map;
      if (!d_in.empty()) {
        map = load_disparity(d_in, enc);
      } else {
        if (d_left.empty() || d_right.empty()) throw InputError("disparity: need --left and --right, or --in");
        BlockMatchParams bm{d_window, d_range[0], d_range[1], d_subpixel};
        map = estimate_disparity(StereoPair(load_image(d_left), load_image(d_right)), bm);
      }
      save_disparity(map, d_out, enc);
      return kOk;
    }

    if (cmd_rt->parsed()) {
      StereoPair pair(load_image(r_left), load_image(r_right));
      const DisparityMap dmap = r_disp.empty() ? estimate_fitted(pair) : load_disparity(r_disp);
      RetargetSpec spec;
      spec.op = parse_operator(r_op);
      if (r_width > 0) {
        spec.target_width = r_width;
      } else {
        if (!(r_ratio > 0.0 && r_ratio <= 1.0)) throw ParameterError("retarget: ratio must lie in (0, 1]");
        spec.target_width = static_cast<int>(std::lround(r_ratio * pair.width()));
      }
      if (!r_offsets.empty()) spec.crop_offsets = std::pair{r_offsets[0], r_offsets[1]};
      spec.seam_gamma = r_gamma;
      spec.block_width = r_block;
      const StereoPair res = retarget(pair, dmap, spec);
      save_image(res.left(), r_out_left);
      save_image(res.right(), r_out_right);
      save_disparity(*res.disparity(), r_out_disp);
      return kOk;
    }

    if (cmd_syn->parsed()) {
      s_opts.seed = seed;
      const auto fo = s_feat.options();
      s_opts.zone = fo.zone;
      s_opts.dr = fo.dr;
      fs::path src = s_sources;
      if (s_generate > 0) {
        if (!s_sources.empty()) throw InputError("synth: use either --sources or --generate");
        src = fs::path(s_out) / "sources";
        SceneOptions so;
        so.width = s_size[0];
        so.height = s_size[1];
        so.seed = seed;
        generate_synthetic_sources(src, s_generate, so);
      } else if (s_sources.empty()) {
        throw InputError("synth: need --sources or --generate");
      }
      const SynthReport rep = synth_corpus(src, s_out, s_opts);
      for (const auto& f : rep.failures) err << "error: " << f << "\n";
      out << "wrote " << rep.manifest.rows.size() << " retargeted pairs to " << (fs::path(s_out) / "manifest.csv").string()
          << "\n";
      if (rep.manifest.rows.empty() && !rep.failures.empty()) return kInputError;
      return rep.failures.empty() ? kOk : kInputError;
    }

    if (cmd_ex->parsed()) {
      const Manifest m = read_manifest(e_manifest);
      const BatchResult res = extract_all(m, e_feat.options(), e_threads, err);
      std::vector<FeatureRow> rows;
      bool failed = false;
      for (std::size_t i = 0; i < m.rows.size(); ++i) {
        if (res.features[i]) rows.push_back({m.rows[i].id, *res.features[i]});
        else failed = true;
      }
      write_features_csv(rows, m.fiq_columns, e_out);
      return failed ? kInputError : kOk;
    }

    if (cmd_tr->parsed()) {
      const FeatureFile ff = read_features_csv(t_features_csv);
      const FeatureSet fs_sel = FeatureSet::parse(t_features);
      std::map<std::string, double> labels;
      if (!t_labels.empty()) {
        for (const auto& [id, l] : read_labels(t_labels).labels) labels[id] = l.vc;
      } else if (!t_manifest.empty()) {
        for (const auto& r : read_manifest(t_manifest).rows)
          if (r.mos) labels[r.id] = r.mos->vc;
      } else {
        throw InputError("train: need --labels or --manifest");
      }
      std::vector<std::vector<double>> x;
      std::vector<double> y;
      for (const auto& r : ff.rows) {
        const auto it = labels.find(r.id);
        if (it == labels.end()) throw InputError("train: no label for '" + r.id + "'");
        x.push_back(fs_sel.select(r.features));
        y.push_back(it->second);
      }
      const SvrModel model = train_svr(x, y, t_svr.params(seed));
      save_model(model, t_out);
      out << "trained on " << x.size() << " samples, " << model.support_vectors.size() << " support vectors\n";
      return kOk;
    }

    if (cmd_pr->parsed()) {
      const SvrModel model = load_model(p_model);
      const FeatureFile ff = read_features_csv(p_features_csv);
      const FeatureSet fs_sel = FeatureSet::parse(p_features);
      CsvTable t;
      t.header = {"id", "score"};
      for (const auto& r : ff.rows) t.rows.push_back({r.id, format_real(predict_svr(model, fs_sel.select(r.features)))});
      write_csv(t, p_out);
      return kOk;
    }

    if (cmd_ev->parsed()) {
      const Manifest m = read_manifest(v_manifest);
      std::vector<RatedSample> data;
      bool failed = false;
      if (!v_features_csv.empty()) {
        std::map<std::string, FeatureVector> by_id;
        for (auto& r : read_features_csv(v_features_csv).rows) by_id[r.id] = r.features;
        for (const auto& row : m.rows) {
          const auto it = by_id.find(row.id);
          if (it == by_id.end()) throw InputError("evaluate: no features for '" + row.id + "'");
          if (!row.mos) throw InputError("evaluate: no mos_vc for '" + row.id + "'");
          data.push_back({row.id, row.scene, row.method, it->second, *row.mos});
        }
      } else {
        const BatchResult res = extract_all(m, v_feat.options(), v_threads, err);
        for (std::size_t i = 0; i < m.rows.size(); ++i) {
          const auto& row = m.rows[i];
          if (!res.features[i]) {
            failed = true;
            continue;
          }
          if (!row.mos) throw InputError("evaluate: no mos_vc for '" + row.id + "'");
          data.push_back({row.id, row.scene, row.method, *res.features[i], *row.mos});
        }
      }
      const bool have_fiq = !data.empty() && !data.front().features.fiq.empty();
      const auto sets = v_features.empty() ? default_feature_sets(have_fiq) : parse_feature_sets(v_features);
      CrossValidationOptions cv{v_iters, v_split, seed, !v_no_group};
      std::vector<EvalReport> reps;
      for (const auto& s : sets) reps.push_back(cross_validate(data, s, v_svr.params(seed), cv));
      out << report_table(reps);
      if (!v_out.empty()) write_csv(report_csv(reps), v_out);
      return failed ? kInputError : kOk;
    }

    if (cmd_mos->parsed()) {
      const LabelSet ls = read_labels(m_ratings, m_threshold);
      if (ls.screening.empty()) throw InputError("mos: expected raw ratings with a subject_id column");
      CsvTable t;
      t.header = {"id"};
      for (const auto& [aspect, res] : ls.screening) t.header.push_back("mos_" + aspect);
      for (std::size_t i = 0; i < ls.ids.size(); ++i) {
        std::vector<std::string> row{ls.ids[i]};
        for (const auto& [aspect, res] : ls.screening) row.push_back(format_real(res.mos[i]));
        t.rows.push_back(std::move(row));
      }
      write_csv(t, m_out);
      std::ostringstream rep;
      rep << "aspect,retained,rejected,agreement_mean,agreement_min,agreement_max\n";
      for (const auto& [aspect, res] : ls.screening)
        rep << aspect << "," << res.retained.size() << "," << res.rejected.size() << ","
            << format_real(res.agreement_mean) << "," << format_real(res.agreement_min) << ","
            << format_real(res.agreement_max) << "\n";
      out << rep.str();
      if (!m_report.empty()) {
        std::ofstream f(m_report, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + m_report + "'");
        f << rep.str();
      }
      return kOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace vcasir::cli
