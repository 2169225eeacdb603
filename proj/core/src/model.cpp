#include "bgch/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bgch/parallel.hpp"

namespace bgch {
namespace {

double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

HashingEncoder::HashingEncoder(const NormalizedAdjacency& adj, EncoderOptions options, EstimatorSpec estimator)
    : adj_(&adj), options_(options), estimator_(estimator) {
  if (options_.layers < 0) throw ConfigError("layer count must be >= 0");
  if (options_.epsilon < 0.0 || options_.epsilon >= 1.0) throw ConfigError("epsilon must lie in [0, 1)");
}

std::size_t HashingEncoder::segments() const noexcept {
  return options_.topology_aware ? static_cast<std::size_t>(options_.layers) + 1 : 1;
}

EncoderCache HashingEncoder::forward(const Matrix& v0, const std::optional<Projection>& proj,
                                     const Matrix* learned_scales) const {
  EncoderCache cache;
  cache.projection = proj;
  cache.stack = convolve_stack(*adj_, v0, proj, options_.epsilon, options_.layers);

  const Eigen::Index nodes = v0.rows();
  const Eigen::Index width = v0.cols();
  const std::size_t segs = segments();
  if (options_.scale_mode == ScaleMode::learned) {
    if (learned_scales == nullptr || learned_scales->rows() != nodes ||
        static_cast<std::size_t>(learned_scales->cols()) != segs) {
      throw DimensionError("learned scales must be a (nodes x segments) matrix");
    }
  }

  const int first = options_.topology_aware ? 0 : options_.layers;
  for (std::size_t s = 0; s < segs; ++s) {
    const int layer = first + static_cast<int>(s);
    const Matrix& h = cache.stack.layers[static_cast<std::size_t>(layer)];
    cache.hashed_layers.push_back(layer);

    Matrix q(nodes, width);
    switch (options_.code_mode) {
      case CodeMode::sign:
        q = h.unaryExpr([](double v) {
          if (std::isnan(v)) throw DivergenceError("NaN in layer activations");
          return v < 0.0 ? -1.0 : 1.0;
        });
        break;
      case CodeMode::surrogate:
        q = h.unaryExpr([this](double v) { return estimator_.value(v); });
        break;
      case CodeMode::identity:
        q = h;
        break;
    }
    cache.codes.push_back(std::move(q));

    Vector alpha(nodes);
    switch (options_.scale_mode) {
      case ScaleMode::computed:
        alpha = h.cwiseAbs().rowwise().sum() / static_cast<double>(width);
        break;
      case ScaleMode::unit:
        alpha.setOnes();
        break;
      case ScaleMode::learned:
        alpha = learned_scales->col(static_cast<Eigen::Index>(s));
        break;
    }
    cache.scales.push_back(std::move(alpha));
  }
  return cache;
}

double HashingEncoder::score(const EncoderCache& cache, std::size_t x, std::size_t y) const {
  double total = 0.0;
  const auto ix = static_cast<Eigen::Index>(x);
  const auto iy = static_cast<Eigen::Index>(y);
  for (std::size_t s = 0; s < cache.segments(); ++s) {
    const double dot = cache.codes[s].row(ix).dot(cache.codes[s].row(iy));
    total += (cache.scales[s][ix] * cache.scales[s][iy]) * dot;
  }
  return total;
}

EncoderGradients HashingEncoder::backward(const EncoderCache& cache, std::span<const PairGradient> pairs) const {
  const Matrix& base = cache.stack.layers.front();
  const Eigen::Index nodes = base.rows();
  const Eigen::Index width = base.cols();
  const std::size_t segs = cache.segments();

  std::vector<Matrix> grad_codes(segs, Matrix::Zero(nodes, width));
  std::vector<Vector> grad_scales(segs, Vector::Zero(nodes));
  for (const PairGradient& pg : pairs) {
    if (pg.weight == 0.0) continue;
    const auto ix = static_cast<Eigen::Index>(pg.x);
    const auto iy = static_cast<Eigen::Index>(pg.y);
    for (std::size_t s = 0; s < segs; ++s) {
      const Matrix& q = cache.codes[s];
      const double ax = cache.scales[s][ix];
      const double ay = cache.scales[s][iy];
      const double dot = q.row(ix).dot(q.row(iy));
      grad_scales[s][ix] += pg.weight * ay * dot;
      grad_scales[s][iy] += pg.weight * ax * dot;
      const double w = pg.weight * ax * ay;
      grad_codes[s].row(ix).noalias() += w * q.row(iy);
      grad_codes[s].row(iy).noalias() += w * q.row(ix);
    }
  }

  // Per-layer gradient w.r.t. the dispersed activations V~(l).
  const auto depth = static_cast<std::size_t>(options_.layers);
  std::vector<Matrix> layer_grad(depth + 1);
  for (std::size_t s = 0; s < segs; ++s) {
    const auto layer = static_cast<std::size_t>(cache.hashed_layers[s]);
    const Matrix& h = cache.stack.layers[layer];
    Matrix g(nodes, width);
    if (options_.code_mode == CodeMode::identity) {
      g = grad_codes[s];
    } else {
      parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t begin, std::size_t end) {
        for (auto r = static_cast<Eigen::Index>(begin); r < static_cast<Eigen::Index>(end); ++r) {
          for (Eigen::Index c = 0; c < width; ++c) g(r, c) = grad_codes[s](r, c) * estimator_.derivative(h(r, c));
        }
      }, 64);
    }
    if (options_.scale_mode == ScaleMode::computed) {
      const double inv_d = 1.0 / static_cast<double>(width);
      for (Eigen::Index r = 0; r < nodes; ++r) {
        const double ga = grad_scales[s][r];
        if (ga == 0.0) continue;
        for (Eigen::Index c = 0; c < width; ++c) g(r, c) += ga * inv_d * sign_or_zero(h(r, c));
      }
    }
    layer_grad[layer] = std::move(g);
  }

  // V~(l) = A^l V~(0) and A is symmetric, so dL/dV~(0) = sum_l A^l G_l,
  // evaluated Horner-style from the deepest layer.
  Matrix acc = layer_grad[depth].size() ? layer_grad[depth] : Matrix::Zero(nodes, width);
  for (std::size_t l = depth; l-- > 0;) {
    acc = adj_->multiply(acc);
    if (layer_grad[l].size()) acc += layer_grad[l];
  }

  EncoderGradients out;
  out.embeddings = cache.projection && options_.epsilon != 0.0 ? disperse(acc, *cache.projection, options_.epsilon)
                                                                : std::move(acc);
  if (options_.scale_mode == ScaleMode::learned) {
    out.scales.resize(nodes, static_cast<Eigen::Index>(segs));
    for (std::size_t s = 0; s < segs; ++s) out.scales.col(static_cast<Eigen::Index>(s)) = grad_scales[s];
  }
  return out;
}

HashCodeTable HashingEncoder::to_table(const EncoderCache& cache) const {
  if (options_.code_mode != CodeMode::sign) throw ConfigError("only sign-mode activations can be packed");
  const Matrix& base = cache.stack.layers.front();
  const auto nodes = static_cast<std::size_t>(base.rows());
  const auto width = static_cast<std::size_t>(base.cols());
  HashCodeTable table(nodes, width, cache.segments());
  std::vector<std::int8_t> codes(width);
  for (std::size_t node = 0; node < nodes; ++node) {
    for (std::size_t s = 0; s < cache.segments(); ++s) {
      const double alpha = cache.scales[s][static_cast<Eigen::Index>(node)];
      const std::int8_t flip = alpha < 0.0 ? -1 : 1;
      for (std::size_t c = 0; c < width; ++c) {
        const double q = cache.codes[s](static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(c));
        codes[c] = static_cast<std::int8_t>((q < 0.0 ? -1 : 1) * flip);
      }
      table.set_segment_codes(node, s, codes, static_cast<float>(std::abs(alpha)));
    }
  }
  return table;
}

}  // namespace bgch
