#include "denn/trainer.hpp"

#include <cmath>
#include <numeric>

#include "denn/error.hpp"
#include "denn/eval.hpp"

namespace denn {

AdamState AdamState::zeros(const EncoderConfig& cfg) {
  return {EncoderParams::zeros(cfg), EncoderParams::zeros(cfg), 0};
}

void adam_step(EncoderParams& params, const ParameterGradients& grads, AdamState& adam,
               double learning_rate, const AdamConfig& cfg) {
  require(params.same_shape(grads) && params.same_shape(adam.first_moment) &&
              params.same_shape(adam.second_moment),
          Errc::dimension_mismatch, "adam_step: parameter, gradient and moment shapes differ");
  ++adam.step;
  const double t = static_cast<double>(adam.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  std::vector<std::span<double>> p;
  std::vector<std::span<const double>> g;
  std::vector<std::span<double>> m;
  std::vector<std::span<double>> v;
  params.for_each_tensor([&](std::string_view, std::span<double> x) { p.push_back(x); });
  grads.for_each_tensor([&](std::string_view, std::span<const double> x) { g.push_back(x); });
  adam.first_moment.for_each_tensor([&](std::string_view, std::span<double> x) { m.push_back(x); });
  adam.second_moment.for_each_tensor(
      [&](std::string_view, std::span<double> x) { v.push_back(x); });

  for (std::size_t t_idx = 0; t_idx < p.size(); ++t_idx) {
    for (std::size_t k = 0; k < p[t_idx].size(); ++k) {
      const double gk = g[t_idx][k];
      double& mk = m[t_idx][k];
      double& vk = v[t_idx][k];
      mk = cfg.beta1 * mk + (1.0 - cfg.beta1) * gk;
      vk = cfg.beta2 * vk + (1.0 - cfg.beta2) * gk * gk;
      const double m_hat = mk / correction1;
      const double v_hat = vk / correction2;
      p[t_idx][k] -= learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  require(batch_size >= 1, Errc::config_error, "batch_size must be >= 1");
  require(learning_rate >= 0.0, Errc::config_error, "learning_rate must be >= 0");
  require(tau1 > 0.0, Errc::config_error, "tau1 must be > 0");
  require(alpha >= 0.0, Errc::config_error, "alpha must be >= 0");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0,
          Errc::config_error, "adam betas must be in [0, 1)");
  require(adam.epsilon > 0.0, Errc::config_error, "adam epsilon must be > 0");
  require(decision_threshold > 0.0 && decision_threshold < 1.0, Errc::config_error,
          "decision_threshold must be in (0, 1)");
}

EncoderConfig TrainConfig::encoder_config(std::size_t vocab_size, std::size_t num_classes) const {
  return {vocab_size, hidden_dim, embed_dim, num_classes, activation, dropout_rate};
}

namespace {

constexpr std::uint64_t kTrainerStream = 0x7261696e65720001ULL;

}  // namespace

Trainer::Trainer(const Dataset& train, const TrainConfig& cfg)
    : train_(train),
      cfg_(cfg),
      state_(init_encoder(cfg.encoder_config(train.vocab_size, train.num_classes), cfg.seed)),
      adam_(AdamState::zeros(state_.config)),
      rng_(cfg.seed ^ kTrainerStream) {
  cfg_.validate();
  require(!train.empty(), Errc::invalid_argument, "train: empty training set");
  validate_dataset(train);
  order_.resize(train.size());
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  rng_.shuffle(std::span<std::uint32_t>(order_));
}

Trainer::Trainer(const Dataset& train, const TrainConfig& cfg, EncoderState state,
                 TrainingSnapshot snapshot)
    : train_(train),
      cfg_(cfg),
      state_(std::move(state)),
      adam_(std::move(snapshot.adam)),
      rng_(Rng::from_state(snapshot.rng)),
      order_(std::move(snapshot.order)),
      cursor_(snapshot.cursor),
      iteration_(snapshot.iteration) {
  cfg_.validate();
  require(!train.empty(), Errc::invalid_argument, "train: empty training set");
  require(order_.size() == train.size() && cursor_ <= order_.size(), Errc::dimension_mismatch,
          "resume: snapshot does not match the training set");
  require(state_.config.vocab_size == train.vocab_size &&
              state_.config.num_classes == train.num_classes,
          Errc::dimension_mismatch, "resume: checkpoint dimensions do not match the dataset");
  require(adam_.first_moment.same_shape(state_.params), Errc::dimension_mismatch,
          "resume: optimizer state does not match the parameters");
  // The checkpoint carries the architecture; the config may not change it.
  cfg_.dropout_rate = state_.config.dropout_rate;
}

std::size_t Trainer::next_index() {
  if (cursor_ == order_.size()) {
    rng_.shuffle(std::span<std::uint32_t>(order_));
    cursor_ = 0;
  }
  return order_[cursor_++];
}

StepStats Trainer::step() {
  const std::size_t n = cfg_.batch_size;
  std::vector<std::size_t> batch(n);
  for (auto& idx : batch) idx = next_index();

  std::vector<ForwardTrace> traces;
  std::vector<LabelVector> labels;
  traces.reserve(2 * n);
  labels.reserve(2 * n);
  for (int view = 0; view < 2; ++view) {
    for (std::size_t idx : batch) {
      const Sample& s = train_.samples[idx];
      traces.push_back(forward(state_, s, DropoutMode::on, rng_));
      labels.push_back(s.labels);
    }
  }

  auto grads = EncoderParams::zeros(state_.config);
  const BatchLoss loss = batch_objective(state_, traces, labels, cfg_.objective(), &grads);
  adam_step(state_.params, grads, adam_, cfg_.learning_rate, cfg_.adam);
  ++iteration_;
  return {iteration_, loss};
}

TrainingSnapshot Trainer::snapshot() const {
  return {adam_, rng_.state(), order_, cursor_, iteration_};
}

double classifier_micro_f1(const EncoderState& state, const Dataset& data, double threshold) {
  std::vector<LabelVector> gold;
  std::vector<LabelVector> pred;
  gold.reserve(data.size());
  pred.reserve(data.size());
  for (const auto& s : data.samples) {
    gold.push_back(s.labels);
    pred.push_back(decide(classify(forward(state, s.features)), threshold));
  }
  return micro_prf(confusion(gold, pred)).f1;
}

TrainResult train(const Dataset& train, const Dataset& valid, const TrainConfig& cfg,
                  const HistoryCallback& on_record, std::optional<ResumePoint> resume) {
  Trainer trainer = resume ? Trainer(train, cfg, std::move(resume->state),
                                     std::move(resume->snapshot))
                           : Trainer(train, cfg);
  if (!valid.empty()) {
    require(valid.num_classes == train.num_classes && valid.vocab_size == train.vocab_size,
            Errc::dimension_mismatch, "train: validation set dimensions differ from training set");
  }
  const std::size_t per_epoch = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t interval = cfg.eval_interval > 0 ? cfg.eval_interval : per_epoch;

  TrainResult result;
  result.best_state = trainer.state();
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const StepStats stats = trainer.step();
    HistoryRecord rec{stats.iteration, stats.loss.bce, stats.loss.con, stats.loss.total, {}};
    const bool last = it + 1 == cfg.max_iters;
    if (!valid.empty() && (stats.iteration % interval == 0 || last)) {
      const double f1 = classifier_micro_f1(trainer.state(), valid, cfg.decision_threshold);
      rec.valid_micro_f1 = f1;
      if (!result.best_valid_micro_f1 || f1 > *result.best_valid_micro_f1) {
        result.best_valid_micro_f1 = f1;
        result.best_state = trainer.state();
        result.best_iteration = stats.iteration;
      }
    }
    if (on_record) on_record(rec);
    result.history.push_back(rec);
  }
  if (valid.empty()) {
    result.best_state = trainer.state();
    result.best_iteration = trainer.iteration();
  }
  result.last_state = trainer.state();
  result.last_snapshot = trainer.snapshot();
  return result;
}

}  // namespace denn
