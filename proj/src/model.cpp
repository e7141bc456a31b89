#include "symreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "symreg/errors.hpp"
#include "symreg/rng.hpp"
#include "symreg/traversal.hpp"

namespace symreg {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;
using CVecMap = Eigen::Map<const RowVec>;
using MVecMap = Eigen::Map<RowVec>;

constexpr double kLayerNormEps = 1e-5;
constexpr double kLogFloor = 1e-12;

CMap view(std::span<const double> data, const TensorSlot& t) {
  return CMap(data.data() + t.offset, t.rows, t.cols);
}
MMap view(std::span<double> data, const TensorSlot& t) {
  return MMap(data.data() + t.offset, t.rows, t.cols);
}
CVecMap vec_view(std::span<const double> data, const TensorSlot& t) {
  return CVecMap(data.data() + t.offset, static_cast<Eigen::Index>(t.size()));
}
MVecMap vec_view(std::span<double> data, const TensorSlot& t) {
  return MVecMap(data.data() + t.offset, static_cast<Eigen::Index>(t.size()));
}

struct LayerNormOut {
  Mat xhat;
  Vec rstd;
};

// Row-wise LayerNorm; returns y and fills xhat/rstd for backward.
Mat layer_norm(const Mat& x, const CVecMap& g, const CVecMap& b, LayerNormOut& out) {
  const Eigen::Index n = x.rows();
  const double d = static_cast<double>(x.cols());
  out.xhat.resize(n, x.cols());
  out.rstd.resize(n);
  Mat y(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.row(i).sum() / d;
    const RowVec centered = x.row(i).array() - mu;
    const double var = centered.squaredNorm() / d;
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    out.rstd[i] = rstd;
    out.xhat.row(i) = centered * rstd;
    y.row(i) = out.xhat.row(i).cwiseProduct(g) + b;
  }
  return y;
}

// dy -> dx, accumulating gain/bias gradients.
Mat layer_norm_backward(const Mat& dy, const LayerNormOut& ln, const CVecMap& g, MVecMap dg,
                        MVecMap db) {
  const Eigen::Index n = dy.rows();
  const double d = static_cast<double>(dy.cols());
  Mat dx(n, dy.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    dg += dy.row(i).cwiseProduct(ln.xhat.row(i));
    db += dy.row(i);
    const RowVec dxhat = dy.row(i).cwiseProduct(g);
    const double mean_dxhat = dxhat.sum() / d;
    const double mean_dxhat_xhat = dxhat.cwiseProduct(ln.xhat.row(i)).sum() / d;
    dx.row(i) = ln.rstd[i] *
                (dxhat.array() - mean_dxhat - ln.xhat.row(i).array() * mean_dxhat_xhat).matrix();
  }
  return dx;
}

constexpr double kGeluC = 0.044715;
const double kGeluK = std::sqrt(2.0 / std::numbers::pi);

double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluK * (u + kGeluC * u * u * u))); }
double gelu_grad(double u) {
  const double t = std::tanh(kGeluK * (u + kGeluC * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluK * (1.0 + 3.0 * kGeluC * u * u);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 1) throw UsageError("model: vocab_size must be positive");
  if (static_cast<int>(token_arity.size()) != vocab_size) {
    throw UsageError("model: token_arity must have vocab_size entries");
  }
  if (embed_dim < 1 || heads < 1 || embed_dim % heads != 0) {
    throw UsageError("model: embed_dim must be a positive multiple of heads");
  }
  if (layers < 0 || ff_dim < 1) throw UsageError("model: layers >= 0 and ff_dim >= 1 required");
  if (max_seq_len < 2) throw UsageError("model: max_seq_len must be >= 2");
  if (!(l2 >= 0.0)) throw UsageError("model: l2 must be >= 0");
  if (!(learning_rate > 0.0)) throw UsageError("model: learning_rate must be positive");
  if (optimizer != "sgd" && optimizer != "adam") {
    throw UsageError("model: optimizer must be \"sgd\" or \"adam\"");
  }
}

ParamLayout ParamLayout::make(const ModelConfig& cfg) {
  ParamLayout l;
  std::size_t offset = 0;
  auto slot = [&](int rows, int cols) {
    TensorSlot t{offset, rows, cols};
    offset += t.size();
    return t;
  };
  const int d = cfg.embed_dim;
  const int v = cfg.vocab_size;
  l.tok_emb = slot(v + 2, d);  // vocabulary, padding, begin
  l.pos_emb = slot(cfg.max_seq_len, d);
  l.parent_emb = slot(v + 1, d);  // vocabulary, padding (empty)
  l.sibling_emb = slot(v + 1, d);
  for (int i = 0; i < cfg.layers; ++i) {
    Layer L;
    L.ln1_g = slot(1, d);
    L.ln1_b = slot(1, d);
    L.w_qkv = slot(d, 3 * d);
    L.b_qkv = slot(1, 3 * d);
    L.w_o = slot(d, d);
    L.b_o = slot(1, d);
    L.ln2_g = slot(1, d);
    L.ln2_b = slot(1, d);
    L.w_1 = slot(d, cfg.ff_dim);
    L.b_1 = slot(1, cfg.ff_dim);
    L.w_2 = slot(cfg.ff_dim, d);
    L.b_2 = slot(1, d);
    l.layers.push_back(L);
  }
  l.lnf_g = slot(1, d);
  l.lnf_b = slot(1, d);
  l.w_policy = slot(d, v);
  l.b_policy = slot(1, v);
  l.w_value = slot(d, 1);
  l.b_value = slot(1, 1);
  l.total = offset;
  return l;
}

std::vector<std::pair<std::string, TensorSlot>> ParamLayout::named() const {
  std::vector<std::pair<std::string, TensorSlot>> out{
      {"tok_emb", tok_emb}, {"pos_emb", pos_emb}, {"parent_emb", parent_emb},
      {"sibling_emb", sibling_emb}};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& L = layers[i];
    const std::string p = "layer" + std::to_string(i) + ".";
    out.insert(out.end(), {{p + "ln1_g", L.ln1_g}, {p + "ln1_b", L.ln1_b}, {p + "w_qkv", L.w_qkv},
                           {p + "b_qkv", L.b_qkv}, {p + "w_o", L.w_o}, {p + "b_o", L.b_o},
                           {p + "ln2_g", L.ln2_g}, {p + "ln2_b", L.ln2_b}, {p + "w_1", L.w_1},
                           {p + "b_1", L.b_1}, {p + "w_2", L.w_2}, {p + "b_2", L.b_2}});
  }
  out.insert(out.end(), {{"lnf_g", lnf_g}, {"lnf_b", lnf_b}, {"w_policy", w_policy},
                         {"b_policy", b_policy}, {"w_value", w_value}, {"b_value", b_value}});
  return out;
}

struct PolicyValueNet::Cache {
  struct Layer {
    Mat x_in;
    LayerNormOut ln1;
    Mat a1;
    Mat qkv;
    std::vector<Mat> attn;  // per head, T x T
    Mat o_cat;
    Mat x_mid;
    LayerNormOut ln2;
    Mat a2;
    Mat u;
    Mat g;
  };
  std::vector<int> input_ids;
  int parent_id = 0;
  int sibling_id = 0;
  std::vector<Layer> layers;
  Mat x_out;
  LayerNormOut lnf;
  RowVec hf;
  std::vector<double> p;
  double v = 0.0;
};

PolicyValueNet::PolicyValueNet(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  layout_ = ParamLayout::make(cfg_);
  params_.assign(layout_.total, 0.0);
  for (const auto& L : layout_.layers) {
    vec_view(std::span<double>(params_), L.ln1_g).setOnes();
    vec_view(std::span<double>(params_), L.ln2_g).setOnes();
  }
  vec_view(std::span<double>(params_), layout_.lnf_g).setOnes();
}

PolicyValueNet PolicyValueNet::initialized(ModelConfig cfg, std::uint64_t seed, double stddev) {
  PolicyValueNet net(std::move(cfg));
  Rng rng(seed);
  for (const auto& [name, slot] : net.layout_.named()) {
    const bool gain = name.ends_with("_g") && name.find("ln") != std::string::npos;
    const bool bias = name.ends_with("_b") || name.find(".b_") != std::string::npos ||
                      name.starts_with("b_");
    for (std::size_t i = 0; i < slot.size(); ++i) {
      double& w = net.params_[slot.offset + i];
      if (gain) {
        w = 1.0;
      } else if (bias) {
        w = 0.0;
      } else {
        w = rng.normal(0.0, stddev);
      }
    }
  }
  return net;
}

double PolicyValueNet::squared_norm() const {
  double s = 0.0;
  for (double w : params_) s += w * w;
  return s;
}

void PolicyValueNet::run_forward(std::span<const int> state, const Mask& mask,
                                 Cache& c) const {
  const int V = cfg_.vocab_size;
  const int d = cfg_.embed_dim;
  const int H = cfg_.heads;
  const int dh = d / H;
  if (static_cast<int>(state.size()) > cfg_.max_seq_len - 1) {
    throw UsageError("forward: state of length " + std::to_string(state.size()) +
                     " exceeds max_seq_len - 1 = " + std::to_string(cfg_.max_seq_len - 1));
  }
  if (static_cast<int>(mask.size()) != V) throw UsageError("forward: mask size mismatch");
  std::vector<int> arities;
  arities.reserve(state.size());
  for (int id : state) {
    if (id < 0 || id >= V) throw UsageError("forward: token id out of range");
    arities.push_back(cfg_.token_arity[static_cast<std::size_t>(id)]);
  }
  const auto [ppos, spos] = parent_sibling_positions(arities);
  c.parent_id = ppos >= 0 ? state[static_cast<std::size_t>(ppos)] : cfg_.padding_id();
  c.sibling_id = spos >= 0 && spos < static_cast<int>(state.size())
                     ? state[static_cast<std::size_t>(spos)]
                     : cfg_.padding_id();

  const std::span<const double> P(params_);
  const int T = static_cast<int>(state.size()) + 1;
  c.input_ids.assign(1, cfg_.begin_id());
  c.input_ids.insert(c.input_ids.end(), state.begin(), state.end());

  const CMap tok = view(P, layout_.tok_emb);
  const CMap pos = view(P, layout_.pos_emb);
  Mat x(T, d);
  for (int i = 0; i < T; ++i) x.row(i) = tok.row(c.input_ids[static_cast<std::size_t>(i)]) + pos.row(i);
  x.row(T - 1) += view(P, layout_.parent_emb).row(c.parent_id) +
                  view(P, layout_.sibling_emb).row(c.sibling_id);

  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  c.layers.resize(layout_.layers.size());
  for (std::size_t l = 0; l < layout_.layers.size(); ++l) {
    const auto& L = layout_.layers[l];
    auto& lc = c.layers[l];
    lc.x_in = x;
    lc.a1 = layer_norm(x, vec_view(P, L.ln1_g), vec_view(P, L.ln1_b), lc.ln1);
    lc.qkv = (lc.a1 * view(P, L.w_qkv)).rowwise() + vec_view(P, L.b_qkv);
    lc.attn.resize(static_cast<std::size_t>(H));
    lc.o_cat.resize(T, d);
    for (int h = 0; h < H; ++h) {
      const auto Q = lc.qkv.middleCols(h * dh, dh);
      const auto K = lc.qkv.middleCols(d + h * dh, dh);
      const auto Vv = lc.qkv.middleCols(2 * d + h * dh, dh);
      Mat S = (Q * K.transpose()) * scale;
      Mat& A = lc.attn[static_cast<std::size_t>(h)];
      A.setZero(T, T);
      for (int i = 0; i < T; ++i) {
        const double m = S.row(i).head(i + 1).maxCoeff();
        double z = 0.0;
        for (int j = 0; j <= i; ++j) {
          A(i, j) = std::exp(S(i, j) - m);
          z += A(i, j);
        }
        A.row(i).head(i + 1) /= z;
      }
      lc.o_cat.middleCols(h * dh, dh) = A * Vv;
    }
    lc.x_mid = x + ((lc.o_cat * view(P, L.w_o)).rowwise() + vec_view(P, L.b_o));
    lc.a2 = layer_norm(lc.x_mid, vec_view(P, L.ln2_g), vec_view(P, L.ln2_b), lc.ln2);
    lc.u = (lc.a2 * view(P, L.w_1)).rowwise() + vec_view(P, L.b_1);
    lc.g = lc.u.unaryExpr([](double u) { return gelu(u); });
    x = lc.x_mid + ((lc.g * view(P, L.w_2)).rowwise() + vec_view(P, L.b_2));
  }
  c.x_out = x;

  Mat last = x.row(T - 1);
  c.hf = layer_norm(last, vec_view(P, layout_.lnf_g), vec_view(P, layout_.lnf_b), c.lnf).row(0);

  const RowVec logits = c.hf * view(P, layout_.w_policy) + vec_view(P, layout_.b_policy);
  double m = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < V; ++k) {
    if (mask[static_cast<std::size_t>(k)]) m = std::max(m, logits[k]);
  }
  if (!std::isfinite(m)) throw UsageError("forward: mask admits no token");
  c.p.assign(static_cast<std::size_t>(V), 0.0);
  double z = 0.0;
  for (int k = 0; k < V; ++k) {
    if (mask[static_cast<std::size_t>(k)]) {
      c.p[static_cast<std::size_t>(k)] = std::exp(logits[k] - m);
      z += c.p[static_cast<std::size_t>(k)];
    }
  }
  for (double& pk : c.p) pk /= z;
  const double v_pre = c.hf.dot(vec_view(P, layout_.w_value)) + P[layout_.b_value.offset];
  c.v = sigmoid(v_pre);
}

PolicyValue PolicyValueNet::forward(std::span<const int> state, const Mask& mask) const {
  Cache c;
  run_forward(state, mask, c);
  return PolicyValue{std::move(c.p), c.v};
}

LossParts loss_terms(const PolicyValue& out, std::span<const double> pi, double z,
                     bool entropy_term) {
  if (pi.size() != out.p.size()) throw UsageError("loss: pi and p differ in length");
  LossParts parts;
  parts.value = (z - out.v) * (z - out.v);
  for (std::size_t j = 0; j < pi.size(); ++j) {
    const double lp = std::log(std::max(out.p[j], kLogFloor));
    parts.policy -= pi[j] * lp;
    if (out.p[j] > 0.0) parts.entropy -= out.p[j] * lp;
  }
  parts.total = parts.value + parts.policy + (entropy_term ? parts.entropy : 0.0);
  return parts;
}

double loss(const PolicyValue& out, std::span<const double> pi, double z,
            const PolicyValueNet& net) {
  return loss_terms(out, pi, z, net.config().entropy_term).total +
         net.config().l2 * net.squared_norm();
}

LossParts PolicyValueNet::loss_and_gradient(std::span<const int> state, const Mask& mask,
                                            std::span<const double> pi, double z,
                                            std::span<double> grad) const {
  if (grad.size() != params_.size()) throw UsageError("gradient buffer size mismatch");
  Cache c;
  run_forward(state, mask, c);
  const PolicyValue out{c.p, c.v};
  const LossParts parts = loss_terms(out, pi, z, cfg_.entropy_term);

  const int V = cfg_.vocab_size;
  const int d = cfg_.embed_dim;
  const int H = cfg_.heads;
  const int dh = d / H;
  const int T = static_cast<int>(c.input_ids.size());
  const std::span<const double> P(params_);

  // d loss / d p over the softmax support, then through the softmax.
  std::vector<double> dp(static_cast<std::size_t>(V), 0.0);
  double p_dot_dp = 0.0;
  for (int j = 0; j < V; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (!mask[ju]) continue;
    const double pj = c.p[ju];
    const bool above = pj >= kLogFloor;
    double g = above ? -pi[ju] / pj : 0.0;
    if (cfg_.entropy_term) g += -std::log(std::max(pj, kLogFloor)) - (above ? 1.0 : 0.0);
    dp[ju] = g;
    p_dot_dp += pj * g;
  }
  RowVec dlogits = RowVec::Zero(V);
  for (int j = 0; j < V; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (mask[ju]) dlogits[j] = c.p[ju] * (dp[ju] - p_dot_dp);
  }
  const double dv_pre = -2.0 * (z - c.v) * c.v * (1.0 - c.v);

  view(grad, layout_.w_policy).noalias() += c.hf.transpose() * dlogits;
  vec_view(grad, layout_.b_policy) += dlogits;
  vec_view(grad, layout_.w_value) += dv_pre * c.hf;
  grad[layout_.b_value.offset] += dv_pre;
  Mat dhf = dlogits * view(P, layout_.w_policy).transpose() +
            dv_pre * vec_view(P, layout_.w_value);

  Mat dX = Mat::Zero(T, d);
  dX.row(T - 1) = layer_norm_backward(dhf, c.lnf, vec_view(P, layout_.lnf_g),
                                      vec_view(grad, layout_.lnf_g),
                                      vec_view(grad, layout_.lnf_b));

  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int l = static_cast<int>(layout_.layers.size()) - 1; l >= 0; --l) {
    const auto& L = layout_.layers[static_cast<std::size_t>(l)];
    const auto& lc = c.layers[static_cast<std::size_t>(l)];

    // Feed-forward block: x_out = x_mid + gelu(a2 W1 + b1) W2 + b2.
    view(grad, L.w_2).noalias() += lc.g.transpose() * dX;
    vec_view(grad, L.b_2) += dX.colwise().sum();
    Mat du = (dX * view(P, L.w_2).transpose()).cwiseProduct(
        lc.u.unaryExpr([](double u) { return gelu_grad(u); }));
    view(grad, L.w_1).noalias() += lc.a2.transpose() * du;
    vec_view(grad, L.b_1) += du.colwise().sum();
    const Mat da2 = du * view(P, L.w_1).transpose();
    Mat dmid = dX + layer_norm_backward(da2, lc.ln2, vec_view(P, L.ln2_g),
                                        vec_view(grad, L.ln2_g), vec_view(grad, L.ln2_b));

    // Attention block: x_mid = x_in + concat_h(A_h V_h) Wo + bo.
    view(grad, L.w_o).noalias() += lc.o_cat.transpose() * dmid;
    vec_view(grad, L.b_o) += dmid.colwise().sum();
    const Mat docat = dmid * view(P, L.w_o).transpose();
    Mat dqkv(T, 3 * d);
    for (int h = 0; h < H; ++h) {
      const Mat& A = lc.attn[static_cast<std::size_t>(h)];
      const auto Q = lc.qkv.middleCols(h * dh, dh);
      const auto K = lc.qkv.middleCols(d + h * dh, dh);
      const auto Vv = lc.qkv.middleCols(2 * d + h * dh, dh);
      const auto dO = docat.middleCols(h * dh, dh);
      const Mat dA = dO * Vv.transpose();
      dqkv.middleCols(2 * d + h * dh, dh) = A.transpose() * dO;
      Mat dS = A.cwiseProduct(dA);
      const Vec row_dot = dS.rowwise().sum();
      dS = A.cwiseProduct(dA.colwise() - row_dot);
      dqkv.middleCols(h * dh, dh) = (dS * K) * scale;
      dqkv.middleCols(d + h * dh, dh) = (dS.transpose() * Q) * scale;
    }
    view(grad, L.w_qkv).noalias() += lc.a1.transpose() * dqkv;
    vec_view(grad, L.b_qkv) += dqkv.colwise().sum();
    const Mat da1 = dqkv * view(P, L.w_qkv).transpose();
    dX = dmid + layer_norm_backward(da1, lc.ln1, vec_view(P, L.ln1_g), vec_view(grad, L.ln1_g),
                                    vec_view(grad, L.ln1_b));
  }

  MMap dtok = view(grad, layout_.tok_emb);
  MMap dpos = view(grad, layout_.pos_emb);
  for (int i = 0; i < T; ++i) {
    dtok.row(c.input_ids[static_cast<std::size_t>(i)]) += dX.row(i);
    dpos.row(i) += dX.row(i);
  }
  view(grad, layout_.parent_emb).row(c.parent_id) += dX.row(T - 1);
  view(grad, layout_.sibling_emb).row(c.sibling_id) += dX.row(T - 1);
  return parts;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double pk : p) {
    if (pk > 0.0) h -= pk * std::log(pk);
  }
  return h;
}

double mean_entropy(std::span<const std::vector<double>> ps) {
  if (ps.empty()) throw UsageError("mean_entropy of an empty list");
  double s = 0.0;
  for (const auto& p : ps) s += entropy(p);
  return s / static_cast<double>(ps.size());
}

}  // namespace symreg
