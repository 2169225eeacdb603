#include "bgch/trainer.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bgch/logging.hpp"
#include "bgch/objective.hpp"

namespace bgch {

Adam::Adam(Eigen::Index rows, Eigen::Index cols, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Matrix::Zero(rows, cols)), v_(Matrix::Zero(rows, cols)) {}

void Adam::step(Matrix& param, const Matrix& grad) {
  if (grad.rows() != m_.rows() || grad.cols() != m_.cols() || param.rows() != m_.rows() ||
      param.cols() != m_.cols()) {
    throw DimensionError("Adam moment shape differs from parameter shape");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  param.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

NegativeSampler::NegativeSampler(const BipartiteGraph& train) : graph_(&train) {}

NodeId NegativeSampler::sample(NodeId x, Rng& rng) const {
  const std::size_t n2 = graph_->n2();
  if (graph_->degree(x) >= n2) throw Error(fmt::format("x node {} has no unobserved y to sample", x));
  std::uniform_int_distribution<NodeId> dist(0, static_cast<NodeId>(n2 - 1));
  for (;;) {
    const NodeId y = dist(rng);
    if (!graph_->has_edge(x, y)) return y;
  }
}

// ---------------------------------------------------------------- checkpoint

namespace {

constexpr char kCheckpointMagic[4] = {'B', 'G', 'C', 'K'};
constexpr std::uint16_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("truncated checkpoint");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m.data()[i]));
}

Matrix get_matrix(std::istream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows > (1ULL << 32) || cols > (1ULL << 20)) throw FormatError("implausible checkpoint tensor shape");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::bit_cast<double>(get<std::uint64_t>(in));
  return m;
}

}  // namespace

class CheckpointIO {
 public:
  static void write_adam(std::ostream& out, const Adam& a) {
    put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(a.lr_));
    put<std::uint64_t>(out, a.t_);
    put_matrix(out, a.m_);
    put_matrix(out, a.v_);
  }
  static Adam read_adam(std::istream& in) {
    Adam a;
    a.lr_ = std::bit_cast<double>(get<std::uint64_t>(in));
    a.t_ = get<std::uint64_t>(in);
    a.m_ = get_matrix(in);
    a.v_ = get_matrix(in);
    return a;
  }
};

void save_checkpoint(const TrainState& state, const TrainConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  out.write(kCheckpointMagic, 4);
  put<std::uint16_t>(out, kCheckpointVersion);
  const std::string text = cfg.to_text();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.epoch));
  put<std::uint64_t>(out, state.iterations);
  put_matrix(out, state.embeddings);
  CheckpointIO::write_adam(out, state.embedding_opt);
  put<std::uint8_t>(out, state.scale_opt ? 1 : 0);
  if (state.scale_opt) {
    put_matrix(out, state.learned_scales);
    CheckpointIO::write_adam(out, *state.scale_opt);
  }
}

TrainState load_checkpoint(const std::filesystem::path& path, TrainConfig* cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("not a checkpoint");
  const auto version = get<std::uint16_t>(in);
  if (version != kCheckpointVersion) throw FormatError(fmt::format("unsupported checkpoint version {}", version));
  const auto len = get<std::uint32_t>(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw FormatError("truncated checkpoint");
  if (cfg != nullptr) *cfg = parse_config(text);
  TrainState state;
  state.epoch = static_cast<int>(get<std::uint32_t>(in));
  state.iterations = get<std::uint64_t>(in);
  state.embeddings = get_matrix(in);
  state.embedding_opt = CheckpointIO::read_adam(in);
  if (get<std::uint8_t>(in) != 0) {
    state.learned_scales = get_matrix(in);
    state.scale_opt = CheckpointIO::read_adam(in);
  }
  return state;
}

std::string metrics_csv(const std::vector<EpochLog>& log, bool with_wall_clock) {
  std::string out = "epoch,loss_rec,loss_bpr,loss_total,recall@20,ndcg@20,wall_ms\n";
  for (const EpochLog& e : log) {
    out += fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.3f}\n", e.epoch, e.loss_rec, e.loss_bpr,
                       e.loss_total, e.recall20, e.ndcg20, with_wall_clock ? e.wall_ms : 0.0);
  }
  return out;
}

// ------------------------------------------------------------------ training

HashCodeTable encode(const NormalizedAdjacency& adj, const TrainConfig& cfg, const Matrix& v0,
                     const std::optional<Projection>& proj, const Matrix* learned_scales) {
  const HashingEncoder encoder(adj, cfg.encoder_options(), cfg.estimator);
  return encoder.to_table(encoder.forward(v0, proj, learned_scales));
}

namespace {

class Trainer {
 public:
  Trainer(const DataSplit& split, const TrainConfig& cfg, const TrainOptions& options)
      : cfg_(cfg),
        options_(options),
        graph_(split.train_graph()),
        held_out_(split.held_out()),
        adj_(normalize(graph_)),
        encoder_(adj_, cfg.encoder_options(), cfg.estimator),
        sampler_(graph_),
        init_rng_(make_stream(cfg.seed, "init")),
        disp_rng_(make_stream(cfg.seed, "dispersion")),
        sample_rng_(make_stream(cfg.seed, "sampling")) {}

  TrainResult run() {
    using Clock = std::chrono::steady_clock;
    const auto nodes = static_cast<Eigen::Index>(graph_.num_nodes());
    std::normal_distribution<double> normal(0.0, cfg_.init_std);
    TrainResult result;
    TrainState& state = result.state;
    state.embeddings.resize(nodes, cfg_.dim);
    for (Eigen::Index i = 0; i < state.embeddings.size(); ++i) state.embeddings.data()[i] = normal(init_rng_);
    state.embedding_opt = Adam(nodes, cfg_.dim, cfg_.lr);

    if (cfg_.freeze_projection && dispersing()) frozen_ = power_iterate(state.embeddings, cfg_.disp_iters, disp_rng_);

    std::vector<Edge> order(graph_.edges().begin(), graph_.edges().end());
    const LossWeights weights = cfg_.loss_weights();
    double best_recall = -1.0;
    int stale = 0;
    double step_ms_total = 0.0;

    for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      const auto epoch_start = Clock::now();
      std::shuffle(order.begin(), order.end(), sample_rng_);
      EpochLog entry;
      entry.epoch = epoch;
      std::size_t batches = 0;
      for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch) {
        const auto step_start = Clock::now();
        const std::size_t end = std::min(order.size(), begin + cfg_.batch);
        TrainingBatch batch;
        batch.per_positive = cfg_.negatives;
        batch.positives.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                               order.begin() + static_cast<std::ptrdiff_t>(end));
        batch.negatives.reserve(batch.positives.size() * cfg_.negatives);
        for (const Edge& e : batch.positives) {
          for (std::size_t j = 0; j < cfg_.negatives; ++j) batch.negatives.push_back(sampler_.sample(e.x, sample_rng_));
        }

        const std::optional<Projection> proj = projection(state.embeddings);
        if (cfg_.ablations.learnable_factors && state.learned_scales.size() == 0) init_scales(state, proj);
        const Matrix* scales = cfg_.ablations.learnable_factors ? &state.learned_scales : nullptr;
        const EncoderCache cache = encoder_.forward(state.embeddings, proj, scales);
        ObjectiveGradients grads;
        const LossBreakdown loss =
            evaluate_objective(encoder_, cache, state.embeddings, graph_.n1(), batch, weights, &grads);
        state.embedding_opt.step(state.embeddings, grads.embeddings);
        if (state.scale_opt) state.scale_opt->step(state.learned_scales, grads.scales);
        if (!state.embeddings.allFinite()) throw DivergenceError(fmt::format("embeddings diverged at epoch {}", epoch));
        ++state.iterations;
        ++batches;
        entry.loss_rec += loss.rec;
        entry.loss_bpr += loss.bpr;
        entry.loss_total += loss.total;
        step_ms_total += std::chrono::duration<double, std::milli>(Clock::now() - step_start).count();
      }
      if (batches > 0) {
        entry.loss_rec /= static_cast<double>(batches);
        entry.loss_bpr /= static_cast<double>(batches);
        entry.loss_total /= static_cast<double>(batches);
      }
      state.epoch = epoch;

      if (options_.validate_each_epoch) {
        const MetricReport report = evaluate(state, {20}, static_cast<std::uint64_t>(epoch));
        entry.recall20 = report.recall[0];
        entry.ndcg20 = report.ndcg[0];
      }
      entry.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - epoch_start).count();
      logger()->debug("epoch {} loss {:.6f} (rec {:.6f}, bpr {:.6f}) recall@20 {:.4f}", epoch, entry.loss_total,
                      entry.loss_rec, entry.loss_bpr, entry.recall20);
      result.log.push_back(entry);
      if (options_.on_epoch) options_.on_epoch(entry);

      if (options_.validate_each_epoch && cfg_.patience > 0) {
        if (entry.recall20 > best_recall) {
          best_recall = entry.recall20;
          stale = 0;
        } else if (++stale >= cfg_.patience) {
          result.early_stopped = true;
          logger()->info("early stop at epoch {} (no recall@20 gain for {} epochs)", epoch, stale);
          break;
        }
      }
    }

    result.iteration_ms = state.iterations > 0 ? step_ms_total / static_cast<double>(state.iterations) : 0.0;
    result.codes = table(state, 0);
    result.final_report = held_out_.empty() ? MetricReport{} : evaluate_table(result.codes, options_.final_cutoffs);
    result.final_report.fingerprint = cfg_.fingerprint();
    return result;
  }

 private:
  bool dispersing() const { return cfg_.effective_epsilon() != 0.0; }

  std::optional<Projection> projection(const Matrix& v0) {
    if (!dispersing()) return std::nullopt;
    if (frozen_) return frozen_;
    return power_iterate(v0, cfg_.disp_iters, disp_rng_);
  }

  // Evaluation draws come from their own stream so validation never shifts
  // the training draws.
  std::optional<Projection> eval_projection(const Matrix& v0, std::uint64_t salt) const {
    if (!dispersing()) return std::nullopt;
    if (frozen_) return frozen_;
    Rng rng = make_stream(cfg_.seed, "eval", salt);
    return power_iterate(v0, cfg_.disp_iters, rng);
  }

  void init_scales(TrainState& state, const std::optional<Projection>& proj) {
    EncoderOptions opts = cfg_.encoder_options();
    opts.scale_mode = ScaleMode::computed;
    const HashingEncoder computed(adj_, opts, cfg_.estimator);
    const EncoderCache cache = computed.forward(state.embeddings, proj);
    state.learned_scales.resize(state.embeddings.rows(), static_cast<Eigen::Index>(cache.segments()));
    for (std::size_t s = 0; s < cache.segments(); ++s) {
      state.learned_scales.col(static_cast<Eigen::Index>(s)) = cache.scales[s];
    }
    state.scale_opt = Adam(state.learned_scales.rows(), state.learned_scales.cols(), cfg_.lr);
  }

  HashCodeTable table(const TrainState& state, std::uint64_t salt) const {
    const Matrix* scales = cfg_.ablations.learnable_factors && state.learned_scales.size() ? &state.learned_scales
                                                                                          : nullptr;
    if (scales == nullptr && cfg_.ablations.learnable_factors) {
      // Not trained yet: fall back to computed factors.
      TrainConfig plain = cfg_;
      plain.ablations.learnable_factors = false;
      return encode(adj_, plain, state.embeddings, eval_projection(state.embeddings, salt));
    }
    return encode(adj_, cfg_, state.embeddings, eval_projection(state.embeddings, salt), scales);
  }

  MetricReport evaluate_table(const HashCodeTable& codes, std::vector<std::size_t> cutoffs) const {
    return evaluate_codes(codes, graph_, held_out_, std::move(cutoffs));
  }

  MetricReport evaluate(const TrainState& state, std::vector<std::size_t> cutoffs, std::uint64_t salt) const {
    return evaluate_table(table(state, salt), std::move(cutoffs));
  }

  TrainConfig cfg_;
  TrainOptions options_;
  BipartiteGraph graph_;
  std::vector<std::vector<NodeId>> held_out_;
  NormalizedAdjacency adj_;
  HashingEncoder encoder_;
  NegativeSampler sampler_;
  Rng init_rng_;
  Rng disp_rng_;
  Rng sample_rng_;
  std::optional<Projection> frozen_;
};

}  // namespace

TrainResult train(const DataSplit& split, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (split.train.empty()) throw EmptyGraphError("training split has no edges");
  Trainer trainer(split, cfg, options);
  return trainer.run();
}

}  // namespace bgch
