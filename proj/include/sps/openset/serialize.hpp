#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sps/openset/models.hpp"

// ClassModelSet <-> JSON document, schema_version 1. Doubles survive the
// round trip bit-exactly (shortest round-trip decimal form).

namespace sps {

namespace detail {

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c].get<double>();
  return m;
}

}  // namespace detail

inline nlohmann::json class_model_set_to_json(const ClassModelSet& set) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = to_string(set.kind);
  doc["dim"] = set.dim;
  doc["seed"] = set.seed;
  nlohmann::json classes = nlohmann::json::array();
  if (set.kind == ModelKind::kGmm) {
    for (const auto& [class_id, m] : set.gmm) {
      nlohmann::json g;
      g["n_components"] = m.n_components;
      g["reg_covar"] = m.reg_covar;
      g["seed"] = m.seed;
      g["converged"] = m.converged;
      g["log_likelihood_history"] = m.log_likelihood_history;
      nlohmann::json weights = nlohmann::json::array();
      nlohmann::json means = nlohmann::json::array();
      nlohmann::json covs = nlohmann::json::array();
      for (const auto& c : m.components) {
        weights.push_back(c.weight);
        means.push_back(detail::to_json(c.mean));
        covs.push_back(detail::to_json(c.covariance));
      }
      g["weights"] = std::move(weights);
      g["means"] = std::move(means);
      g["covariances"] = std::move(covs);
      classes.push_back({{"class_id", class_id}, {"gmm", std::move(g)}});
    }
  } else {
    for (const auto& [class_id, m] : set.pcs) {
      nlohmann::json p;
      p["n_components"] = m.n_components;
      p["mean"] = detail::to_json(m.mean);
      p["axes"] = detail::to_json(m.axes);
      p["eigenvalues"] = detail::to_json(m.eigenvalues);
      p["noise_variance"] = m.noise_variance;
      classes.push_back({{"class_id", class_id}, {"pcs", std::move(p)}});
    }
  }
  doc["classes"] = std::move(classes);
  return doc;
}

inline ClassModelSet class_model_set_from_json(const nlohmann::json& doc) {
  if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1)
    throw std::invalid_argument("model document: unsupported schema version");
  ClassModelSet set;
  set.kind = model_kind_from_string(doc.at("kind").get<std::string>());
  set.dim = doc.at("dim").get<int>();
  set.seed = doc.at("seed").get<uint64_t>();
  for (const auto& entry : doc.at("classes")) {
    const int32_t class_id = entry.at("class_id").get<int32_t>();
    if (set.kind == ModelKind::kGmm) {
      const auto& g = entry.at("gmm");
      GmmModel m;
      m.n_components = g.at("n_components").get<int>();
      m.dim = set.dim;
      m.reg_covar = g.at("reg_covar").get<double>();
      m.seed = g.at("seed").get<uint64_t>();
      m.converged = g.at("converged").get<bool>();
      m.log_likelihood_history =
          g.at("log_likelihood_history").get<std::vector<double>>();
      const auto& weights = g.at("weights");
      const auto& means = g.at("means");
      const auto& covs = g.at("covariances");
      m.components.resize(m.n_components);
      for (int i = 0; i < m.n_components; ++i) {
        m.components[i].weight = weights[i].get<double>();
        m.components[i].mean = detail::vector_from_json(means[i]);
        m.components[i].covariance = detail::matrix_from_json(covs[i]);
      }
      set.gmm.emplace(class_id, std::move(m));
    } else {
      const auto& p = entry.at("pcs");
      PcsModel m;
      m.n_components = p.at("n_components").get<int>();
      m.dim = set.dim;
      m.mean = detail::vector_from_json(p.at("mean"));
      m.axes = detail::matrix_from_json(p.at("axes"));
      m.eigenvalues = detail::vector_from_json(p.at("eigenvalues"));
      m.noise_variance = p.at("noise_variance").get<double>();
      set.pcs.emplace(class_id, std::move(m));
    }
  }
  return set;
}

inline void save_class_model_set(const ClassModelSet& set,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << class_model_set_to_json(set).dump(2) << "\n";
}

inline ClassModelSet load_class_model_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json doc;
  in >> doc;
  return class_model_set_from_json(doc);
}

}  // namespace sps
