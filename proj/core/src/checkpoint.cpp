#include "denn/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "binary_io.hpp"
#include "denn/error.hpp"

namespace denn {
namespace {

constexpr char kMagic[8] = {'D', 'E', 'N', 'N', 'M', 'O', 'D', 'L'};

void put_params(detail::ByteWriter& w, const EncoderParams& p) {
  p.for_each_tensor([&](std::string_view, std::span<const double> t) {
    w.put_bytes(t.data(), t.size_bytes());
  });
}

void get_params(detail::ByteReader& r, EncoderParams& p, const std::string& what) {
  p.for_each_tensor([&](std::string_view name, std::span<double> t) {
    r.take(t.data(), t.size_bytes());
    if (!all_finite(t)) fail(Errc::format_error, what + ": non-finite value in " + std::string(name));
  });
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  const auto& cfg = ckpt.state.config;
  detail::ByteWriter w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(cfg.activation));
  w.put<std::uint8_t>(ckpt.training ? 1 : 0);
  w.put<std::uint16_t>(0);
  w.put<std::uint64_t>(cfg.vocab_size);
  w.put<std::uint64_t>(cfg.hidden_dim);
  w.put<std::uint64_t>(cfg.embed_dim);
  w.put<std::uint64_t>(cfg.num_classes);
  w.put<double>(cfg.dropout_rate);
  w.put<std::uint64_t>(ckpt.state.seed);
  require(ckpt.state.params.same_shape(EncoderParams::zeros(cfg)), Errc::dimension_mismatch,
          "save_checkpoint: parameters do not match the encoder config");
  put_params(w, ckpt.state.params);
  if (ckpt.training) {
    const auto& t = *ckpt.training;
    w.put<std::uint64_t>(t.adam.step);
    put_params(w, t.adam.first_moment);
    put_params(w, t.adam.second_moment);
    for (auto word : t.rng) w.put<std::uint64_t>(word);
    w.put<std::uint64_t>(t.order.size());
    w.put_array(t.order);
    w.put<std::uint64_t>(t.cursor);
    w.put<std::uint64_t>(t.iteration);
  }
  w.put<std::uint64_t>(detail::fnv1a(w.bytes().data(), w.bytes().size()));
  detail::write_file(path.string(), w.bytes());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  const std::string what = "checkpoint '" + path.string() + "'";
  if (bytes.size() < sizeof(kMagic) + sizeof(std::uint64_t)) {
    fail(Errc::format_error, what + ": truncated file");
  }
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    fail(Errc::format_error, what + ": bad magic bytes");
  }
  std::uint64_t stored_sum = 0;
  std::copy_n(bytes.end() - sizeof(stored_sum), sizeof(stored_sum),
              reinterpret_cast<unsigned char*>(&stored_sum));
  const std::vector<unsigned char> body(bytes.begin(), bytes.end() - sizeof(stored_sum));
  if (detail::fnv1a(body.data(), body.size()) != stored_sum) {
    fail(Errc::format_error, what + ": checksum mismatch (corrupt file)");
  }

  detail::ByteReader r(body, what);
  char magic[8];
  r.take(magic, sizeof(magic));
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    fail(Errc::format_error, what + ": unsupported version " + std::to_string(version));
  }
  const auto activation = r.get<std::uint8_t>();
  const auto has_training = r.get<std::uint8_t>();
  if (activation > 1 || has_training > 1 || r.get<std::uint16_t>() != 0) {
    fail(Errc::format_error, what + ": invalid header flags");
  }
  EncoderConfig cfg;
  cfg.activation = static_cast<Activation>(activation);
  cfg.vocab_size = r.get<std::uint64_t>();
  cfg.hidden_dim = r.get<std::uint64_t>();
  cfg.embed_dim = r.get<std::uint64_t>();
  cfg.num_classes = r.get<std::uint64_t>();
  cfg.dropout_rate = r.get<double>();
  const auto seed = r.get<std::uint64_t>();
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(Errc::format_error, what + ": invalid header: " + e.what());
  }
  const std::size_t param_bytes =
      8 * (cfg.vocab_size * cfg.hidden_dim + cfg.hidden_dim + cfg.embed_dim * cfg.hidden_dim +
           cfg.embed_dim + cfg.num_classes * cfg.embed_dim + cfg.num_classes);
  if (param_bytes > r.remaining()) fail(Errc::format_error, what + ": truncated file");

  ModelCheckpoint ckpt;
  ckpt.state = EncoderState{cfg, EncoderParams::zeros(cfg), seed};
  get_params(r, ckpt.state.params, what);
  if (has_training != 0) {
    TrainingSnapshot t;
    t.adam = AdamState::zeros(cfg);
    t.adam.step = r.get<std::uint64_t>();
    get_params(r, t.adam.first_moment, what);
    get_params(r, t.adam.second_moment, what);
    for (auto& word : t.rng) word = r.get<std::uint64_t>();
    const auto order_len = r.get<std::uint64_t>();
    if (order_len > r.remaining() / sizeof(std::uint32_t)) {
      fail(Errc::format_error, what + ": truncated file");
    }
    t.order.resize(order_len);
    r.take(t.order.data(), order_len * sizeof(std::uint32_t));
    t.cursor = r.get<std::uint64_t>();
    t.iteration = r.get<std::uint64_t>();
    ckpt.training = std::move(t);
  }
  if (r.remaining() != 0) fail(Errc::format_error, what + ": trailing bytes");
  return ckpt;
}

}  // namespace denn
