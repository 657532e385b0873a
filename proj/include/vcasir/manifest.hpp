#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vcasir/csv.hpp"
#include "vcasir/error.hpp"
#include "vcasir/evaluation.hpp"
#include "vcasir/features.hpp"
#include "vcasir/mos.hpp"
#include "vcasir/svr.hpp"

namespace vcasir {

/// One stereo pair of a corpus.
struct ManifestRow {
  std::string id;
  std::string method;  // source, crop, scale, seam, multi, external
  std::string scene;
  std::filesystem::path left;
  std::filesystem::path right;
  std::optional<std::filesystem::path> disparity;
  std::optional<MosLabels> mos;
  std::vector<double> fiq;
  bool synthetic = false;
};

struct Manifest {
  std::vector<std::string> fiq_columns;  // full names, e.g. "fiq_bnssd"
  std::vector<ManifestRow> rows;
};

inline bool valid_method(const std::string& m) {
  static const std::set<std::string> kMethods{"source", "crop", "scale", "seam", "multi", "external"};
  return kMethods.count(m) != 0;
}

/// Scene of an id following the `<scene>_<method>` convention; the id itself otherwise.
inline std::string scene_of(const std::string& id, const std::string& method) {
  const std::string suffix = "_" + method;
  if (id.size() > suffix.size() && id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0)
    return id.substr(0, id.size() - suffix.size());
  return id;
}

/// Reads a manifest; relative paths resolve against the manifest's directory.
inline Manifest read_manifest(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto base = path.parent_path();
  const std::size_t c_id = t.require("id"), c_method = t.require("method"), c_left = t.require("left_path"),
                    c_right = t.require("right_path");
  const auto c_disp = t.column("disparity_path");
  const auto c_vc = t.column("mos_vc");
  const auto c_iq = t.column("mos_iq");
  const auto c_dq = t.column("mos_dq");
  const auto c_ov = t.column("mos_ov");
  const auto c_syn = t.column("synthetic_flag");
  const auto c_scene = t.column("scene");
  Manifest m;
  std::vector<std::size_t> fiq_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i].rfind("fiq_", 0) == 0) {
      m.fiq_columns.push_back(t.header[i]);
      fiq_cols.push_back(i);
    }

  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  auto opt_real = [&](const std::vector<std::string>& row, std::optional<std::size_t> c,
                      const std::string& what) -> std::optional<double> {
    if (!c || row[*c].empty()) return std::nullopt;
    return parse_real(row[*c], what);
  };

  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    ManifestRow r;
    r.id = row[c_id];
    if (r.id.empty()) throw ParseError("manifest: empty id");
    if (!seen.insert(r.id).second) throw ParseError("manifest: duplicate id '" + r.id + "'");
    r.method = row[c_method];
    if (!valid_method(r.method)) throw ParseError("manifest: unknown method '" + r.method + "' for " + r.id);
    r.scene = (c_scene && !row[*c_scene].empty()) ? row[*c_scene] : scene_of(r.id, r.method);
    r.left = resolve(row[c_left]);
    r.right = resolve(row[c_right]);
    if (c_disp && !row[*c_disp].empty()) r.disparity = resolve(row[*c_disp]);
    if (auto vc = opt_real(row, c_vc, "mos_vc")) {
      MosLabels mos;
      mos.vc = *vc;
      mos.iq = opt_real(row, c_iq, "mos_iq");
      mos.dq = opt_real(row, c_dq, "mos_dq");
      mos.ov = opt_real(row, c_ov, "mos_ov");
      r.mos = mos;
    }
    for (std::size_t c : fiq_cols) r.fiq.push_back(parse_real(row[c], t.header[c]));
    r.synthetic = c_syn && (row[*c_syn] == "1" || row[*c_syn] == "true");
    m.rows.push_back(std::move(r));
  }
  return m;
}

/// Writes paths exactly as stored (callers pass paths relative to the manifest).
inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"id", "method", "left_path", "right_path", "disparity_path", "mos_vc", "mos_iq", "mos_dq", "mos_ov"};
  t.header.insert(t.header.end(), m.fiq_columns.begin(), m.fiq_columns.end());
  t.header.push_back("synthetic_flag");
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const auto& r : m.rows) {
    std::vector<std::string> row{r.id,
                                 r.method,
                                 r.left.generic_string(),
                                 r.right.generic_string(),
                                 r.disparity ? r.disparity->generic_string() : std::string(),
                                 r.mos ? format_real(r.mos->vc) : std::string(),
                                 r.mos ? opt(r.mos->iq) : std::string(),
                                 r.mos ? opt(r.mos->dq) : std::string(),
                                 r.mos ? opt(r.mos->ov) : std::string()};
    if (r.fiq.size() != m.fiq_columns.size()) throw InputError("manifest: fiq column count mismatch for " + r.id);
    for (double v : r.fiq) row.push_back(format_real(v));
    row.push_back(r.synthetic ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

struct FeatureRow {
  std::string id;
  FeatureVector features;
};

inline std::vector<std::string> feature_header(const std::vector<std::string>& fiq_columns) {
  std::vector<std::string> h{"id", "dr", "bd_al", "bd_ar", "bd_d", "did_mean", "did_var"};
  for (int k = 1; k <= static_cast<int>(kNiqDims); ++k) h.push_back(k < 10 ? "niq_0" + std::to_string(k) : "niq_" + std::to_string(k));
  h.insert(h.end(), fiq_columns.begin(), fiq_columns.end());
  return h;
}

inline CsvTable features_table(const std::vector<FeatureRow>& rows, const std::vector<std::string>& fiq_columns) {
  CsvTable t;
  t.header = feature_header(fiq_columns);
  for (const auto& r : rows) {
    if (r.features.fiq.size() != fiq_columns.size()) throw InputError("features: fiq column count mismatch for " + r.id);
    std::vector<std::string> row{r.id};
    for (double v : r.features.flatten()) row.push_back(format_real(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_features_csv(const std::vector<FeatureRow>& rows, const std::vector<std::string>& fiq_columns,
                               const std::filesystem::path& path) {
  write_csv(features_table(rows, fiq_columns), path);
}

struct FeatureFile {
  std::vector<std::string> fiq_columns;
  std::vector<FeatureRow> rows;
};

inline FeatureFile read_features_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  FeatureFile f;
  const auto base = feature_header({});
  if (t.header.size() < base.size() || !std::equal(base.begin(), base.end(), t.header.begin()))
    throw ParseError("features: unexpected header in '" + path.string() + "'");
  for (std::size_t i = base.size(); i < t.header.size(); ++i) {
    if (t.header[i].rfind("fiq_", 0) != 0) throw ParseError("features: unexpected column '" + t.header[i] + "'");
    f.fiq_columns.push_back(t.header[i]);
  }
  for (const auto& row : t.rows) {
    FeatureRow r;
    r.id = row[0];
    std::vector<double> v;
    for (std::size_t i = 1; i < row.size(); ++i) v.push_back(parse_real(row[i], t.header[i]));
    FeatureVector& fv = r.features;
    fv.dr = v[0];
    std::copy(v.begin() + 1, v.begin() + 4, fv.bd.begin());
    std::copy(v.begin() + 4, v.begin() + 6, fv.did.begin());
    std::copy(v.begin() + 6, v.begin() + 6 + kNiqDims, fv.niq.begin());
    fv.fiq.assign(v.begin() + 6 + kNiqDims, v.end());
    f.rows.push_back(std::move(r));
  }
  return f;
}

/// Per-image labels keyed by id, either pre-aggregated (`id,mos_vc[,...]`) or raw
/// (`id,subject_id,vc[,iq,dq,ov]`, screened and averaged per aspect).
struct LabelSet {
  std::vector<std::string> ids;  // file order
  std::map<std::string, MosLabels> labels;
  std::vector<std::pair<std::string, MosResult>> screening;  // aspect -> result, raw input only
};

inline LabelSet labels_from_raw(const CsvTable& t, double threshold) {
  const std::size_t c_id = t.require("id"), c_subj = t.require("subject_id");
  std::vector<std::pair<std::string, std::size_t>> aspects;
  for (const char* a : {"vc", "iq", "dq", "ov"})
    if (auto c = t.column(a)) aspects.emplace_back(a, *c);
  if (aspects.empty() || aspects.front().first != "vc") throw ParseError("ratings: missing 'vc' column");

  LabelSet out;
  std::map<std::string, std::size_t> image_index, subject_index;
  std::vector<std::string> subjects;
  for (const auto& row : t.rows) {
    if (image_index.try_emplace(row[c_id], out.ids.size()).second) out.ids.push_back(row[c_id]);
    if (subject_index.try_emplace(row[c_subj], subjects.size()).second) subjects.push_back(row[c_subj]);
  }
  for (const auto& [name, col] : aspects) {
    std::vector<std::vector<double>> m(subjects.size(), std::vector<double>(out.ids.size(), -1.0));
    for (const auto& row : t.rows)
      m[subject_index[row[c_subj]]][image_index[row[c_id]]] = parse_real(row[col], name);
    for (const auto& s : m)
      for (double v : s)
        if (v < 0.0) throw InputError("ratings: every subject must rate every image");
    MosResult res = mos_from_ratings(m, threshold);
    for (std::size_t i = 0; i < out.ids.size(); ++i) {
      MosLabels& l = out.labels[out.ids[i]];
      if (name == "vc") l.vc = res.mos[i];
      else if (name == "iq") l.iq = res.mos[i];
      else if (name == "dq") l.dq = res.mos[i];
      else l.ov = res.mos[i];
    }
    out.screening.emplace_back(name, std::move(res));
  }
  return out;
}

inline LabelSet read_labels(const std::filesystem::path& path, double threshold = 0.7) {
  const CsvTable t = read_csv(path);
  if (t.column("subject_id")) return labels_from_raw(t, threshold);
  const std::size_t c_id = t.require("id"), c_vc = t.require("mos_vc");
  LabelSet out;
  for (const auto& row : t.rows) {
    MosLabels l;
    l.vc = parse_real(row[c_vc], "mos_vc");
    auto opt = [&](const char* col) -> std::optional<double> {
      const auto c = t.column(col);
      if (!c || row[*c].empty()) return std::nullopt;
      return parse_real(row[*c], col);
    };
    l.iq = opt("mos_iq");
    l.dq = opt("mos_dq");
    l.ov = opt("mos_ov");
    if (!out.labels.emplace(row[c_id], l).second) throw ParseError("labels: duplicate id '" + row[c_id] + "'");
    out.ids.push_back(row[c_id]);
  }
  return out;
}

}  // namespace vcasir
