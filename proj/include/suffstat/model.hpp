#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "suffstat/error.hpp"
#include "suffstat/graph.hpp"
#include "suffstat/types.hpp"

namespace suffstat {

// Largest p for which 2^p tables are materialized.
inline constexpr std::size_t kDefaultEnumerationCap = 20;

// Binary state x in {0,1}^p packed into an integer: coordinate i is bit i.
using State = std::uint64_t;

inline State pack_state(std::span<const std::uint8_t> x) {
  require(x.size() <= 64, "pack_state: more than 64 coordinates");
  State s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) s |= State{1} << i;
  }
  return s;
}

inline std::vector<std::uint8_t> unpack_state(State s, std::size_t p) {
  std::vector<std::uint8_t> x(p);
  for (std::size_t i = 0; i < p; ++i) x[i] = static_cast<std::uint8_t>((s >> i) & 1U);
  return x;
}

// Weight function h over {0,1}^p, either a dense log-weight table or the
// anti-ferromagnetic Ising form log h(x) = 2 beta #{(i,j) in E : x_i != x_j}.
class Model {
 public:
  enum class Kind { dense, antiferro_ising };

  Kind kind() const noexcept {
    return std::holds_alternative<Dense>(form_) ? Kind::dense : Kind::antiferro_ising;
  }
  bool is_ising() const noexcept { return kind() == Kind::antiferro_ising; }
  std::size_t dimension() const noexcept { return p_; }

  const Graph& graph() const {
    if (!is_ising()) fail(ErrorKind::invalid_input, "model: dense model has no graph");
    return std::get<Ising>(form_).graph;
  }
  double beta() const {
    if (!is_ising()) fail(ErrorKind::invalid_input, "model: dense model has no beta");
    return std::get<Ising>(form_).beta;
  }
  std::span<const double> dense_table() const {
    if (is_ising()) fail(ErrorKind::invalid_input, "model: ising model has no dense table");
    return *std::get<Dense>(form_).log_weights;
  }

  double log_weight(State x) const {
    if (p_ > 64) fail(ErrorKind::invalid_input, "model: packed states need p <= 64");
    if (const auto* d = std::get_if<Dense>(&form_)) return (*d->log_weights)[x];
    const auto& ising = std::get<Ising>(form_);
    std::size_t disagree = 0;
    for (auto [a, b] : ising.graph.edges()) disagree += ((x >> a) ^ (x >> b)) & 1U;
    return 2.0 * ising.beta * static_cast<double>(disagree);
  }

  double log_weight(std::span<const std::uint8_t> x) const {
    require(x.size() == p_, "eval_log_weight: state length differs from p");
    if (is_ising()) {
      const auto& ising = std::get<Ising>(form_);
      std::size_t disagree = 0;
      for (auto [a, b] : ising.graph.edges()) disagree += (x[a] != 0) != (x[b] != 0);
      return 2.0 * ising.beta * static_cast<double>(disagree);
    }
    return log_weight(pack_state(x));
  }

  friend Model build_dense_model(std::size_t, Vector, std::size_t);
  friend Model build_antiferro_ising(Graph, double);

 private:
  struct Dense {
    std::shared_ptr<const Vector> log_weights;
  };
  struct Ising {
    Graph graph;
    double beta;
  };

  Model(std::size_t p, std::variant<Dense, Ising> form) : p_(p), form_(std::move(form)) {}

  std::size_t p_ = 0;
  std::variant<Dense, Ising> form_;
};

inline Model build_dense_model(std::size_t p, Vector log_weights,
                               std::size_t cap = kDefaultEnumerationCap) {
  require(p >= 1, "build_dense_model: p must be positive");
  require(p <= cap, "build_dense_model: p exceeds the enumeration cap");
  require(log_weights.size() == (std::size_t{1} << p),
          "build_dense_model: table length must be 2^p");
  for (double v : log_weights) require(std::isfinite(v), "build_dense_model: non-finite log-weight");
  return Model(p, Model::Dense{std::make_shared<const Vector>(std::move(log_weights))});
}

inline Model build_antiferro_ising(Graph graph, double beta) {
  require(std::isfinite(beta) && beta >= 0.0, "build_antiferro_ising: beta must be >= 0");
  require(graph.vertex_count() >= 1, "build_antiferro_ising: empty graph");
  const std::size_t p = graph.vertex_count();
  return Model(p, Model::Ising{std::move(graph), beta});
}

inline double eval_log_weight(const Model& model, std::span<const std::uint8_t> x) {
  return model.log_weight(x);
}

// Materializes log h over all 2^p states.
inline Vector log_weight_table(const Model& model, std::size_t cap = kDefaultEnumerationCap) {
  const std::size_t p = model.dimension();
  if (p > cap) fail(ErrorKind::invalid_input, "model dimension exceeds the enumeration cap");
  if (model.kind() == Model::Kind::dense) {
    auto t = model.dense_table();
    return Vector(t.begin(), t.end());
  }
  const std::size_t count = std::size_t{1} << p;
  Vector table(count);
  for (State x = 0; x < count; ++x) table[x] = model.log_weight(x);
  return table;
}

// K(p) = beta k p, the log-weight span bound for anti-ferromagnetic Ising models.
inline double ising_span_bound(const Model& model) {
  return model.beta() * static_cast<double>(model.graph().degree()) *
         static_cast<double>(model.dimension());
}

// log h(0).
inline double log_weight_at_zero(const Model& model) { return model.log_weight(State{0}); }

}  // namespace suffstat
