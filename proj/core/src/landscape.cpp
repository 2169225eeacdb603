#include "bgch/landscape.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bgch/trainer.hpp"

namespace bgch {

double LandscapeGrid::range(LandscapeVariant variant) const {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const LandscapePoint& pt : points) {
    if (pt.variant != variant) continue;
    lo = std::min(lo, pt.loss);
    hi = std::max(hi, pt.loss);
  }
  return hi >= lo ? hi - lo : 0.0;
}

std::string LandscapeGrid::to_csv() const {
  std::string out = "variant,p_i,p_j,loss\n";
  for (const LandscapePoint& pt : points) {
    out += fmt::format("{},{:.6g},{:.6g},{:.12g}\n", pt.variant == LandscapeVariant::hashed ? "hashed" : "non_hashed",
                       pt.p_i, pt.p_j, pt.loss);
  }
  return out;
}

std::vector<double> landscape_range(double p_start, double p_end, double step) {
  if (!(step > 0.0) || p_end < p_start) throw ConfigError("landscape range needs start <= end and step > 0");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double p = p_start + static_cast<double>(i) * step;
    if (p > p_end + 1e-9) break;
    out.push_back(p);
  }
  return out;
}

LandscapeGrid landscape_scan(const BipartiteGraph& train, const TrainConfig& cfg, const Matrix& v0,
                             const std::vector<double>& p_values) {
  cfg.validate();
  if (train.num_edges() == 0) throw EmptyGraphError("landscape scan needs training edges");
  if (static_cast<std::size_t>(v0.rows()) != train.num_nodes()) throw DimensionError("embedding rows != graph nodes");

  const NormalizedAdjacency adj = normalize(train);
  Rng rng = make_stream(cfg.seed, "landscape");
  std::optional<Projection> proj;
  if (cfg.effective_epsilon() != 0.0) proj = power_iterate(v0, cfg.disp_iters, rng);

  TrainingBatch batch;
  batch.per_positive = cfg.negatives;
  batch.positives.assign(train.edges().begin(), train.edges().end());
  const NegativeSampler sampler(train);
  for (const Edge& e : batch.positives) {
    for (std::size_t j = 0; j < cfg.negatives; ++j) batch.negatives.push_back(sampler.sample(e.x, rng));
  }

  EncoderOptions hashed = cfg.encoder_options();
  if (hashed.scale_mode == ScaleMode::learned) hashed.scale_mode = ScaleMode::computed;
  EncoderOptions smooth = hashed;
  smooth.code_mode = CodeMode::identity;
  smooth.scale_mode = ScaleMode::unit;
  const HashingEncoder enc_hashed(adj, hashed, cfg.estimator);
  const HashingEncoder enc_smooth(adj, smooth, cfg.estimator);
  const LossWeights weights = cfg.loss_weights();

  const Vector row_scale = v0.cwiseAbs().rowwise().mean();
  const auto n1 = static_cast<Eigen::Index>(train.n1());

  LandscapeGrid grid;
  grid.p_values = p_values;
  Matrix v(v0.rows(), v0.cols());
  for (const auto& [variant, encoder] :
       {std::pair{LandscapeVariant::hashed, &enc_hashed}, std::pair{LandscapeVariant::non_hashed, &enc_smooth}}) {
    for (double pi : p_values) {
      for (double pj : p_values) {
        for (Eigen::Index r = 0; r < v0.rows(); ++r) {
          const double shift = (r < n1 ? pi : pj) * row_scale[r];
          v.row(r) = v0.row(r).array() + shift;
        }
        const EncoderCache cache = encoder->forward(v, proj);
        const LossBreakdown loss = evaluate_objective(*encoder, cache, v, train.n1(), batch, weights);
        grid.points.push_back({variant, pi, pj, loss.total});
      }
    }
  }
  return grid;
}

}  // namespace bgch
