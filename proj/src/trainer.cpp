#include "xmcaug/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "xmcaug/errors.hpp"
#include "xmcaug/rng.hpp"

namespace xmcaug::trainer {

namespace {

std::uint64_t fnv1a64(const char* data, std::size_t len,
                      std::uint64_t h = 0xcbf29ce484222325ull) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Separator byte between bigram halves; cannot occur inside a token.
constexpr char kBigramSep = ' ';

template <typename Fn>
void for_each_bucket(std::string_view text, std::size_t hash_dim, bool bigrams,
                     Fn&& emit) {
  const std::uint64_t mask = hash_dim - 1;
  std::string token, prev;
  auto flush = [&](std::string& tok) {
    if (tok.empty()) return;
    emit(static_cast<std::uint32_t>(fnv1a64(tok.data(), tok.size()) & mask));
    if (bigrams && !prev.empty()) {
      std::uint64_t h = fnv1a64(prev.data(), prev.size());
      h = fnv1a64(&kBigramSep, 1, h);
      h = fnv1a64(tok.data(), tok.size(), h);
      emit(static_cast<std::uint32_t>(h & mask));
    }
    std::swap(prev, tok);
    tok.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush(token);
    } else {
      token.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush(token);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Numerically stable BCE with logits: max(s,0) - s*y + log(1+exp(-|s|)).
double bce_with_logits(double target, double logit) {
  return std::max(logit, 0.0) - logit * target +
         std::log1p(std::exp(-std::abs(logit)));
}

}  // namespace

Featurizer Featurizer::fit(const TextCorpus& corpus,
                           const FeaturizerConfig& cfg) {
  if (cfg.hash_dim == 0 || (cfg.hash_dim & (cfg.hash_dim - 1)) != 0)
    fail("InvalidConfig", "hash_dim must be a power of two");
  Featurizer f;
  f.cfg_ = cfg;
  std::vector<std::uint64_t> df(cfg.hash_dim, 0);
  std::vector<std::uint32_t> seen;
  for (const auto& text : corpus.texts) {
    seen.clear();
    for_each_bucket(text, cfg.hash_dim, cfg.bigrams,
                    [&](std::uint32_t b) { seen.push_back(b); });
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::uint32_t b : seen) ++df[b];
  }
  const double n = static_cast<double>(corpus.size());
  f.idf_.resize(cfg.hash_dim);
  for (std::size_t b = 0; b < cfg.hash_dim; ++b)
    f.idf_[b] =
        std::log((1.0 + n) / (1.0 + static_cast<double>(df[b]))) + 1.0;
  return f;
}

std::vector<std::uint32_t> Featurizer::buckets(std::string_view text) const {
  std::vector<std::uint32_t> out;
  for_each_bucket(text, cfg_.hash_dim, cfg_.bigrams,
                  [&](std::uint32_t b) { out.push_back(b); });
  return out;
}

FeatureVec Featurizer::transform(std::string_view text) const {
  auto bs = buckets(text);
  std::sort(bs.begin(), bs.end());
  FeatureVec vec;
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < bs.size();) {
    std::size_t j = i;
    while (j < bs.size() && bs[j] == bs[i]) ++j;
    double tfidf = static_cast<double>(j - i) * idf_[bs[i]];
    vec.emplace_back(bs[i], tfidf);
    norm_sq += tfidf * tfidf;
    i = j;
  }
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [b, v] : vec) v *= inv;
  }
  return vec;
}

LinearOvAModel::LinearOvAModel(Featurizer feat, std::size_t n_labels)
    : feat_(std::move(feat)),
      n_labels_(n_labels),
      w_(feat_.hash_dim() * n_labels, 0.0),
      b_(n_labels, 0.0) {}

double LinearOvAModel::score(const FeatureVec& phi, LabelIndex l) const {
  const double* col = w_.data() + static_cast<std::size_t>(l) * feat_.hash_dim();
  double s = b_[l];
  for (const auto& [idx, v] : phi) s += col[idx] * v;
  return s;
}

namespace {

constexpr char kCheckpointMagic[8] = {'X', 'M', 'C', 'O', 'V', 'A', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void LinearOvAModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod(out, static_cast<std::uint64_t>(feat_.hash_dim()));
  write_pod(out, static_cast<std::uint64_t>(n_labels_));
  write_pod(out, static_cast<std::uint8_t>(feat_.bigrams() ? 1 : 0));
  out.write(reinterpret_cast<const char*>(feat_.idf_.data()),
            static_cast<std::streamsize>(feat_.idf_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(w_.data()),
            static_cast<std::streamsize>(w_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(b_.data()),
            static_cast<std::streamsize>(b_.size() * sizeof(double)));
  if (!out) fail("IoError", "write failed: " + path.string());
}

LinearOvAModel LinearOvAModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    fail("BadCheckpoint", path.string() + ": unrecognized header");
  std::uint64_t hash_dim = 0, n_labels = 0;
  std::uint8_t bigrams = 0;
  read_pod(in, hash_dim);
  read_pod(in, n_labels);
  read_pod(in, bigrams);
  LinearOvAModel m;
  m.feat_.cfg_.hash_dim = hash_dim;
  m.feat_.cfg_.bigrams = bigrams != 0;
  m.feat_.idf_.resize(hash_dim);
  m.n_labels_ = n_labels;
  m.w_.resize(hash_dim * n_labels);
  m.b_.resize(n_labels);
  in.read(reinterpret_cast<char*>(m.feat_.idf_.data()),
          static_cast<std::streamsize>(hash_dim * sizeof(double)));
  in.read(reinterpret_cast<char*>(m.w_.data()),
          static_cast<std::streamsize>(m.w_.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(m.b_.data()),
          static_cast<std::streamsize>(m.b_.size() * sizeof(double)));
  if (!in) fail("BadCheckpoint", path.string() + ": truncated file");
  return m;
}

double batch_loss(const LinearOvAModel& model,
                  const std::vector<FeatureVec>& features,
                  const std::vector<ShortlistedExample>& batch) {
  double total = 0.0;
  for (const auto& ex : batch) {
    const auto& phi = features[ex.instance];
    for (const auto& [l, target] : ex.shortlist)
      total += bce_with_logits(target, model.score(phi, l));
  }
  return total;
}

std::vector<LabelGradient> batch_gradient(
    const LinearOvAModel& model, const std::vector<FeatureVec>& features,
    const std::vector<ShortlistedExample>& batch) {
  std::vector<LabelGradient> grads;
  for (const auto& ex : batch) {
    const auto& phi = features[ex.instance];
    for (const auto& [l, target] : ex.shortlist) {
      // d BCE / d logit = sigma(s) - y
      double coeff = sigmoid(model.score(phi, l)) - target;
      LabelGradient g;
      g.label = l;
      g.d_bias = coeff;
      g.d_weights.reserve(phi.size());
      for (const auto& [idx, v] : phi) g.d_weights.emplace_back(idx, coeff * v);
      grads.push_back(std::move(g));
    }
  }
  return grads;
}

LinearOvAModel train(const Dataset& ds, const TrainConfig& cfg,
                     const FeaturizerConfig& feat_cfg) {
  if (ds.n_rows() == 0) fail("EmptyDataset", "no training instances");
  ds.validate();

  auto feat = Featurizer::fit(ds.instances, feat_cfg);
  std::vector<FeatureVec> features(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    features[i] = feat.transform(ds.instances.texts[i]);

  LinearOvAModel model(std::move(feat), ds.n_labels());
  const std::size_t hash_dim = model.featurizer().hash_dim();
  const std::size_t L = ds.n_labels();
  const std::size_t batch_size = std::max<std::size_t>(1, cfg.batch_size);

  rng::Engine eng(cfg.seed);
  std::vector<std::size_t> order(ds.n_rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<ShortlistedExample> batch;
  std::unordered_set<LabelIndex> positives;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng::shuffle(order, eng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      std::size_t stop = std::min(start + batch_size, order.size());
      batch.clear();
      for (std::size_t pos = start; pos < stop; ++pos) {
        std::size_t i = order[pos];
        ShortlistedExample ex;
        ex.instance = i;
        positives.clear();
        for (const auto& [l, w] : ds.y.rows[i]) {
          ex.shortlist.emplace_back(l, w);
          positives.insert(l);
        }
        // Uniform negatives, rejecting shortlist positives.
        std::size_t wanted = std::min(cfg.negatives_per_instance,
                                      L - positives.size());
        std::size_t added = 0;
        while (added < wanted) {
          auto l = static_cast<LabelIndex>(rng::next_below(eng, L));
          if (positives.insert(l).second) {
            ex.shortlist.emplace_back(l, 0.0);
            ++added;
          }
        }
        batch.push_back(std::move(ex));
      }
      // Gradients are computed against the batch-start weights, then applied
      // in fixed order; equivalent to summed mini-batch accumulation.
      auto grads = batch_gradient(model, features, batch);
      const double lr = cfg.learning_rate;
      for (const auto& g : grads) {
        double* col = model.weights().data() +
                      static_cast<std::size_t>(g.label) * hash_dim;
        for (const auto& [idx, dv] : g.d_weights) col[idx] -= lr * dv;
        model.biases()[g.label] -= lr * g.d_bias;
      }
    }
  }
  return model;
}

metrics::Predictions predict(const LinearOvAModel& model,
                             const TextCorpus& texts, std::size_t top_k,
                             std::size_t workers) {
  const std::size_t L = model.n_labels();
  if (top_k > L) fail("InvalidConfig", "top_k exceeds label count");

  metrics::Predictions pred;
  pred.depth = top_k;
  pred.rows.resize(texts.size());

  auto score_range = [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<LabelIndex, double>> scored(L);
    for (std::size_t i = begin; i < end; ++i) {
      auto phi = model.featurizer().transform(texts.texts[i]);
      for (LabelIndex l = 0; l < L; ++l) scored[l] = {l, model.score(phi, l)};
      auto cmp = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      };
      std::partial_sort(scored.begin(), scored.begin() + top_k, scored.end(),
                        cmp);
      pred.rows[i].assign(scored.begin(), scored.begin() + top_k);
    }
  };

  workers = std::max<std::size_t>(1, workers);
  if (workers == 1 || texts.size() < 2 * workers) {
    score_range(0, texts.size());
  } else {
    // Instances write to disjoint preallocated slots, so the result is
    // identical for any worker count.
    std::vector<std::thread> pool;
    std::size_t chunk = (texts.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      std::size_t begin = w * chunk;
      std::size_t end = std::min(begin + chunk, texts.size());
      if (begin >= end) break;
      pool.emplace_back(score_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return pred;
}

}  // namespace xmcaug::trainer
