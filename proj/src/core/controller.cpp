#include "core/controller.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "core/common.hpp"

namespace hdmann {

Architecture Architecture::desk(int d, int input_size) {
  Architecture a;
  a.input_size = input_size;
  a.embedding_dim = d;
  a.layers = {{LayerSpec::Kind::kConv, 16, 5}, {LayerSpec::Kind::kConv, 16, 5},
              {LayerSpec::Kind::kMaxPool, 0, 0}, {LayerSpec::Kind::kConv, 16, 3},
              {LayerSpec::Kind::kConv, 16, 3}, {LayerSpec::Kind::kMaxPool, 0, 0}};
  return a;
}

Architecture Architecture::full(int d, int input_size) {
  Architecture a = desk(d, input_size);
  for (auto& l : a.layers)
    if (l.kind == LayerSpec::Kind::kConv) l.filters = 128;
  return a;
}

Architecture Architecture::from_string(const std::string& desc, int d, int input_size) {
  if (desc == "desk") return desk(d, input_size);
  if (desc == "full") return full(d, input_size);
  Architecture a;
  a.input_size = input_size;
  a.embedding_dim = d;
  std::stringstream ss(desc);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "pool") {
      a.layers.push_back({LayerSpec::Kind::kMaxPool, 0, 0});
    } else if (tok.rfind("conv:", 0) == 0) {
      auto x = tok.find('x', 5);
      if (x == std::string::npos) throw ValidationError("bad conv spec: " + tok);
      int filters = std::stoi(tok.substr(5, x - 5));
      int kernel = std::stoi(tok.substr(x + 1));
      if (filters < 1 || kernel < 1) throw ValidationError("bad conv spec: " + tok);
      a.layers.push_back({LayerSpec::Kind::kConv, filters, kernel});
    } else {
      throw ValidationError("unknown architecture token: " + tok);
    }
  }
  if (a.layers.empty()) throw ValidationError("empty architecture");
  a.flattened_features();  // validates spatial sizes
  return a;
}

std::string Architecture::to_string() const {
  std::string out;
  for (const auto& l : layers) {
    if (!out.empty()) out += ',';
    if (l.kind == LayerSpec::Kind::kMaxPool) {
      out += "pool";
    } else {
      out += "conv:" + std::to_string(l.filters) + "x" + std::to_string(l.kernel);
    }
  }
  return out;
}

int Architecture::flattened_features() const {
  int size = input_size, channels = 1;
  for (const auto& l : layers) {
    if (l.kind == LayerSpec::Kind::kConv) {
      size = size - l.kernel + 1;
      channels = l.filters;
    } else {
      size = size / 2;
    }
    if (size < 1) throw ValidationError("architecture shrinks input below 1x1");
  }
  return channels * size * size;
}

int64_t Architecture::param_count() const {
  int64_t count = 0;
  int channels = 1;
  for (const auto& l : layers) {
    if (l.kind != LayerSpec::Kind::kConv) continue;
    count += static_cast<int64_t>(l.filters) * channels * l.kernel * l.kernel + l.filters;
    channels = l.filters;
  }
  count += static_cast<int64_t>(flattened_features()) * embedding_dim + embedding_dim;
  return count;
}

ControllerParams ControllerParams::init(const Architecture& arch, Rng& rng) {
  ControllerParams p;
  p.arch = arch;
  int channels = 1;
  auto uniform_fan_in = [&rng](Tensor& t, int fan_in) {
    double limit = std::sqrt(1.0 / fan_in);
    for (double& x : t.data) x = (2.0 * rng.uniform() - 1.0) * limit;
  };
  for (const auto& l : arch.layers) {
    if (l.kind != LayerSpec::Kind::kConv) continue;
    Tensor w({l.filters, channels, l.kernel, l.kernel});
    uniform_fan_in(w, channels * l.kernel * l.kernel);
    p.tensors.push_back(std::move(w));
    p.tensors.push_back(Tensor({l.filters}));  // zero biases
    channels = l.filters;
  }
  int features = arch.flattened_features();
  Tensor w({features, arch.embedding_dim});
  uniform_fan_in(w, features);
  p.tensors.push_back(std::move(w));
  p.tensors.push_back(Tensor({arch.embedding_dim}));
  return p;
}

int64_t ControllerParams::param_count() const {
  int64_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

namespace {

constexpr uint32_t kCheckpointMagic = 0x31434448;  // "HDC1"
constexpr uint32_t kCheckpointVersion = 1;

void write_u32(std::ostream& os, uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("truncated checkpoint");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void write_f64(std::ostream& os, double x) {
  uint64_t bits;
  std::memcpy(&bits, &x, 8);
  write_u32(os, static_cast<uint32_t>(bits));
  write_u32(os, static_cast<uint32_t>(bits >> 32));
}

double read_f64(std::istream& is) {
  uint64_t bits = read_u32(is);
  bits |= static_cast<uint64_t>(read_u32(is)) << 32;
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw IoError("truncated checkpoint");
  return s;
}

}  // namespace

void ControllerParams::save(std::ostream& os) const {
  write_u32(os, kCheckpointMagic);
  write_u32(os, kCheckpointVersion);
  write_string(os, arch.to_string());
  write_u32(os, static_cast<uint32_t>(arch.input_size));
  write_u32(os, static_cast<uint32_t>(arch.embedding_dim));
  write_u32(os, static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    write_u32(os, static_cast<uint32_t>(t.shape.size()));
    for (int s : t.shape) write_u32(os, static_cast<uint32_t>(s));
    for (double x : t.data) write_f64(os, x);
  }
}

ControllerParams ControllerParams::load(std::istream& is) {
  if (read_u32(is) != kCheckpointMagic) throw IoError("bad checkpoint magic");
  uint32_t version = read_u32(is);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  std::string desc = read_string(is);
  int input_size = static_cast<int>(read_u32(is));
  int d = static_cast<int>(read_u32(is));
  ControllerParams p;
  p.arch = Architecture::from_string(desc, d, input_size);
  uint32_t count = read_u32(is);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t rank = read_u32(is);
    std::vector<int> shape(rank);
    for (auto& s : shape) s = static_cast<int>(read_u32(is));
    Tensor t(shape);
    for (auto& x : t.data) x = read_f64(is);
    p.tensors.push_back(std::move(t));
  }
  return p;
}

void ControllerParams::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  save(os);
}

ControllerParams ControllerParams::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  return load(is);
}

namespace {

Tensor images_to_tensor(const std::vector<Image>& images, int expected_size) {
  if (images.empty()) throw ValidationError("no images");
  Tensor t({static_cast<int>(images.size()), 1, expected_size, expected_size});
  int64_t px = static_cast<int64_t>(expected_size) * expected_size;
  for (size_t i = 0; i < images.size(); ++i) {
    if (images[i].size != expected_size) throw ValidationError("image size mismatch");
    std::copy(images[i].px.begin(), images[i].px.end(), t.data.begin() + static_cast<int64_t>(i) * px);
  }
  return t;
}

// Shared graph builder: images leaf -> embedding matrix [B, d].
Var build_embedding_graph(Tape& tape, const ControllerParams& params, Var images,
                          std::vector<Var>& param_vars) {
  param_vars.clear();
  for (const auto& t : params.tensors) param_vars.push_back(tape.leaf(t));
  Var x = images;
  size_t ti = 0;
  for (const auto& l : params.arch.layers) {
    if (l.kind == LayerSpec::Kind::kConv) {
      x = tape.conv2d(x, param_vars[ti], param_vars[ti + 1]);
      ti += 2;
      x = tape.relu(x);
    } else {
      x = tape.maxpool2(x);
    }
  }
  x = tape.flatten(x);
  // Final dense layer; no output activation during training.
  return tape.dense(x, param_vars[ti], param_vars[ti + 1]);
}

}  // namespace

Tensor embed_batch(const ControllerParams& params, const std::vector<Image>& images) {
  Tensor x = images_to_tensor(images, params.arch.input_size);
  size_t ti = 0;
  Tensor y;
  std::vector<int> argmax;
  for (const auto& l : params.arch.layers) {
    if (l.kind == LayerSpec::Kind::kConv) {
      conv2d_forward(x, params.tensors[ti], params.tensors[ti + 1], y);
      ti += 2;
      relu_forward(y, x);
    } else {
      maxpool2_forward(x, y, argmax);
      x = std::move(y);
    }
  }
  Tensor flat({x.dim(0), static_cast<int>(x.size() / x.dim(0))});
  flat.data = x.data;
  Tensor out;
  dense_forward(flat, params.tensors[ti], params.tensors[ti + 1], out);
  return out;
}

RealVec embed(const ControllerParams& params, const Image& image) {
  Tensor e = embed_batch(params, {image});
  return RealVec(e.data.begin(), e.data.end());
}

AdamState AdamState::init(const ControllerParams& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const auto& t : params.tensors) {
    s.m.emplace_back(t.shape);
    s.v.emplace_back(t.shape);
  }
  return s;
}

void adam_step(ControllerParams& params, AdamState& state, const std::vector<Tensor>& grads) {
  if (grads.size() != params.tensors.size())
    throw ValidationError("adam_step: gradient count mismatch");
  state.t += 1;
  double b1 = state.config.beta1, b2 = state.config.beta2;
  double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (size_t ti = 0; ti < params.tensors.size(); ++ti) {
    auto& theta = params.tensors[ti].data;
    auto& m = state.m[ti].data;
    auto& v = state.v[ti].data;
    const auto& g = grads[ti].data;
    for (size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      theta[i] -= state.config.lr * mhat / (std::sqrt(vhat) + state.config.eps);
    }
  }
}

namespace {

double batch_accuracy(const Tensor& p, const std::vector<int>& labels) {
  int b = p.dim(0), m = p.dim(1);
  int correct = 0;
  for (int i = 0; i < b; ++i) {
    int best = 0;
    for (int j = 1; j < m; ++j)
      if (p.data[static_cast<size_t>(i * m + j)] > p.data[static_cast<size_t>(i * m + best)])
        best = j;
    if (best == labels[static_cast<size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / b;
}

Tensor one_hot_rows(const std::vector<int>& labels, int classes) {
  Tensor y({static_cast<int>(labels.size()), classes});
  for (size_t i = 0; i < labels.size(); ++i)
    y.data[i * static_cast<size_t>(classes) + static_cast<size_t>(labels[i])] = 1.0;
  return y;
}

}  // namespace

TrainingStepRecord train_episode(ControllerParams& params, AdamState& adam,
                                 const Episode& episode, const SharpeningSpec& sharpening,
                                 const RegularizerSpec& reg) {
  int mn = static_cast<int>(episode.support_images.size());
  int b = static_cast<int>(episode.query_images.size());
  int m = episode.ways;

  std::vector<Image> all = episode.support_images;
  all.insert(all.end(), episode.query_images.begin(), episode.query_images.end());

  Tape tape;
  Var images = tape.leaf(images_to_tensor(all, params.arch.input_size));
  std::vector<Var> param_vars;
  Var embeddings = build_embedding_graph(tape, params, images, param_vars);

  Var keys = tape.slice_rows(embeddings, 0, mn);
  Var queries = tape.slice_rows(embeddings, mn, b);
  Var alphas = tape.cosine_rows(queries, keys);
  Var sharpened = tape.sharpen_op(alphas, sharpening);
  Var weights = tape.normalize_rows(sharpened);
  Var probs = tape.matmul_const(weights, one_hot_rows(episode.support_labels, m));
  Var losses = tape.log_loss(probs, one_hot_rows(episode.query_labels, m));
  Var avg = tape.scale_sum(losses, 1.0 / m);

  Var total = avg;
  if (reg.enabled) {
    Var oc = tape.occupancy_penalty(keys, reg.a);
    Var aux = tape.aux_penalty(keys, reg.a, reg.delta);
    total = tape.add_scaled(tape.add_scaled(avg, oc, reg.weight_oc), aux, reg.weight_aux);
  }
  tape.backward(total);

  std::vector<Tensor> grads;
  grads.reserve(param_vars.size());
  for (Var v : param_vars) grads.push_back(tape.grad(v));
  adam_step(params, adam, grads);

  TrainingStepRecord rec;
  rec.query_losses = tape.val(losses).data;
  rec.avg_loss = tape.val(avg).data[0];
  rec.total_loss = tape.val(total).data[0];
  rec.probabilities = tape.val(probs);
  rec.truth = one_hot_rows(episode.query_labels, m);
  rec.accuracy = batch_accuracy(rec.probabilities, episode.query_labels);
  return rec;
}

double eval_episode_training_style(const ControllerParams& params, const Episode& episode,
                                   const SharpeningSpec& sharpening) {
  int mn = static_cast<int>(episode.support_images.size());
  int b = static_cast<int>(episode.query_images.size());

  std::vector<Image> all = episode.support_images;
  all.insert(all.end(), episode.query_images.begin(), episode.query_images.end());
  Tensor e = embed_batch(params, all);
  int d = e.dim(1);

  std::vector<RealVec> keys(static_cast<size_t>(mn));
  for (int i = 0; i < mn; ++i)
    keys[static_cast<size_t>(i)] =
        RealVec(e.data.begin() + static_cast<int64_t>(i) * d, e.data.begin() + static_cast<int64_t>(i + 1) * d);
  ValueMemory values = ValueMemory::from_labels(episode.support_labels, episode.ways);

  int correct = 0;
  for (int qi = 0; qi < b; ++qi) {
    RealVec q(e.data.begin() + static_cast<int64_t>(mn + qi) * d,
              e.data.begin() + static_cast<int64_t>(mn + qi + 1) * d);
    AttentionResult att = attention_vector(keys, q, sharpening, /*normalize=*/true);
    auto p = readout(att.weights, values);
    if (predict_sum_argmax(p) == episode.query_labels[static_cast<size_t>(qi)]) ++correct;
  }
  return static_cast<double>(correct) / b;
}

TrainResult run_training(const TrainingConfig& config, const GlyphDataset& dataset) {
  if (config.max_episodes < 1 || config.val_interval < 1 || config.val_episodes < 1)
    throw ValidationError("training counts must be positive");
  if (config.val_interval > config.max_episodes)
    throw ValidationError("val_interval exceeds max_episodes");

  if (config.arch.input_size != dataset.image_size)
    throw ValidationError("architecture input size does not match dataset image size");
  Rng init_rng = Rng::stream(config.seed, "init");
  ControllerParams params = ControllerParams::init(config.arch, init_rng);
  AdamState adam = AdamState::init(params, config.adam);

  TrainResult result;
  result.best = params;
  result.best_val_acc = -1.0;

  Rng episode_rng = Rng::stream(config.seed, "episodes");
  int checkpoints_since_best = 0;
  for (int ep = 1; ep <= config.max_episodes; ++ep) {
    Episode episode = sample_episode(dataset, Split::kTrain, config.ways, config.shots,
                                     config.batch, config.augment, episode_rng);
    TrainingStepRecord rec = train_episode(params, adam, episode, config.sharpening,
                                           config.regularizer);
    TrainLogRow row;
    row.episode = ep;
    row.loss = rec.total_loss;
    row.train_acc = rec.accuracy;

    if (ep % config.val_interval == 0) {
      Rng val_rng = Rng::stream(config.seed, "validation", static_cast<uint64_t>(ep));
      AugmentSpec no_augment;
      no_augment.enabled = false;
      double acc_sum = 0.0;
      for (int v = 0; v < config.val_episodes; ++v) {
        Episode val_ep = sample_episode(dataset, Split::kValidation, config.ways, config.shots,
                                        config.batch, no_augment, val_rng);
        acc_sum += eval_episode_training_style(params, val_ep, config.sharpening);
      }
      double val_acc = acc_sum / config.val_episodes;
      row.val_acc = val_acc;
      if (val_acc > result.best_val_acc) {
        result.best_val_acc = val_acc;
        result.best = params;
        result.best_episode = ep;
        checkpoints_since_best = 0;
      } else {
        ++checkpoints_since_best;
      }
      result.log.push_back(row);
      result.episodes_run = ep;
      if (config.patience > 0 && checkpoints_since_best >= config.patience) break;
    } else {
      result.log.push_back(row);
      result.episodes_run = ep;
    }
  }
  return result;
}

void write_training_log_csv(const std::vector<TrainLogRow>& log, std::ostream& os) {
  os << "episode,loss,train_acc,val_acc\n";
  for (const auto& row : log) {
    os << row.episode << ',' << format_double(row.loss) << ',' << format_double(row.train_acc)
       << ',';
    if (row.val_acc >= 0.0) os << format_double(row.val_acc);
    os << '\n';
  }
}

SharpeningSpec default_inference_sharpening(VecMode mode) {
  SharpeningSpec spec;
  spec.kind = mode == VecMode::kBinary ? Sharpening::kBypass : Sharpening::kAbsolute;
  return spec;
}

double infer_episode(const ControllerParams& params, const Episode& episode,
                     const InferOptions& options, Rng* program_rng, Rng* read_rng,
                     std::vector<QueryTrace>* traces, int episode_id) {
  int mn = static_cast<int>(episode.support_images.size());
  int b = static_cast<int>(episode.query_images.size());
  int d = params.arch.embedding_dim;

  std::vector<Image> all = episode.support_images;
  all.insert(all.end(), episode.query_images.begin(), episode.query_images.end());
  Tensor e = embed_batch(params, all);

  SharpeningSpec sharpening = options.sharpening.value_or(default_inference_sharpening(options.mode));
  bool normalize = options.normalize.value_or(false);

  KvmemOptions kv;
  kv.mode = options.mode;
  kv.backend = options.backend;
  kv.pcm = options.pcm;
  kv.readout = options.readout;
  kv.wordlines = options.wordlines;
  kv.bitlines = options.bitlines;
  kv.randomize_placement = options.randomize_placement;
  kv.spatial_variability = options.spatial_variability;
  KeyValueMemory mem(kv);

  auto row = [&e, d](int i) {
    return std::span<const double>(e.ptr() + static_cast<int64_t>(i) * d, static_cast<size_t>(d));
  };

  std::vector<RealVec> real_rows;
  std::vector<BipolarVec> bipolar_rows;
  std::vector<BinaryVec> binary_rows;
  switch (options.mode) {
    case VecMode::kReal:
      for (int i = 0; i < mn; ++i) real_rows.emplace_back(row(i).begin(), row(i).end());
      mem.write_support(real_rows, episode.support_labels, episode.ways);
      break;
    case VecMode::kBipolar:
      for (int i = 0; i < mn; ++i) bipolar_rows.push_back(clip_to_bipolar(row(i)));
      mem.write_support(bipolar_rows, episode.support_labels, episode.ways, program_rng);
      break;
    case VecMode::kBinary:
      for (int i = 0; i < mn; ++i) binary_rows.push_back(clip_to_binary(row(i)));
      mem.write_support(binary_rows, episode.support_labels, episode.ways, program_rng);
      break;
  }

  int correct = 0;
  for (int qi = 0; qi < b; ++qi) {
    QueryResult res;
    switch (options.mode) {
      case VecMode::kReal:
        res = mem.query(RealVec(row(mn + qi).begin(), row(mn + qi).end()), sharpening, normalize,
                        options.criterion);
        break;
      case VecMode::kBipolar:
        res = mem.query(clip_to_bipolar(row(mn + qi)), sharpening, normalize, options.criterion,
                        read_rng);
        break;
      case VecMode::kBinary:
        res = mem.query(clip_to_binary(row(mn + qi)), sharpening, normalize, options.criterion,
                        read_rng);
        break;
    }
    if (res.predicted == episode.query_labels[static_cast<size_t>(qi)]) ++correct;
    if (traces) {
      QueryTrace t;
      t.episode_id = episode_id;
      t.query_id = qi;
      t.true_label = episode.query_labels[static_cast<size_t>(qi)];
      t.predicted = res.predicted;
      t.alphas = res.attention.similarities;
      t.weights = res.attention.weights;
      traces->push_back(std::move(t));
    }
  }
  return static_cast<double>(correct) / b;
}

void write_traces_csv(const std::vector<QueryTrace>& traces, std::ostream& os) {
  os << "episode,query,true_label,predicted,alphas,weights\n";
  for (const auto& t : traces) {
    os << t.episode_id << ',' << t.query_id << ',' << t.true_label << ',' << t.predicted << ',';
    for (size_t i = 0; i < t.alphas.size(); ++i) {
      if (i) os << ';';
      os << format_double(t.alphas[i]);
    }
    os << ',';
    for (size_t i = 0; i < t.weights.size(); ++i) {
      if (i) os << ';';
      os << format_double(t.weights[i]);
    }
    os << '\n';
  }
}

}  // namespace hdmann
