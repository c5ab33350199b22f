#include "maple/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace maple {

void MlpGrads::zero() {
  for (auto& m : dW) m.setZero();
  for (auto& v : db) v.setZero();
}

Vec MlpGrads::flat() const {
  Eigen::Index n = 0;
  for (size_t l = 0; l < dW.size(); ++l) n += dW[l].size() + db[l].size();
  Vec out(n);
  Eigen::Index at = 0;
  for (size_t l = 0; l < dW.size(); ++l) {
    for (Eigen::Index r = 0; r < dW[l].rows(); ++r)
      for (Eigen::Index c = 0; c < dW[l].cols(); ++c) out[at++] = dW[l](r, c);
    for (Eigen::Index r = 0; r < db[l].size(); ++r) out[at++] = db[l][r];
  }
  return out;
}

Mlp::Mlp(const std::vector<int>& sizes, std::mt19937_64& rng,
         double final_scale)
    : sizes_(sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp needs >= 2 sizes");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    int in = sizes[l], out = sizes[l + 1];
    if (in <= 0 || out <= 0)
      throw std::invalid_argument("mlp sizes must be positive");
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Mat W(out, in);
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = bound * unit(rng);
    if (l + 2 == sizes.size()) W *= final_scale;
    W_.push_back(std::move(W));
    b_.push_back(Vec::Zero(out));
  }
}

int Mlp::in_dim() const { return sizes_.empty() ? 0 : sizes_.front(); }
int Mlp::out_dim() const { return sizes_.empty() ? 0 : sizes_.back(); }

Mat Mlp::forward(const Mat& X) const {
  MlpCache cache;
  return forward(X, cache);
}

Vec Mlp::forward(const Vec& x) const {
  Mat X = x.transpose();
  return forward(X).row(0).transpose();
}

Mat Mlp::forward(const Mat& X, MlpCache& cache) const {
  if (X.cols() != in_dim())
    throw std::invalid_argument("mlp input width mismatch");
  cache.acts.clear();
  cache.acts.push_back(X);
  Mat a = X;
  for (size_t l = 0; l < W_.size(); ++l) {
    Mat z = a * W_[l].transpose();
    z.rowwise() += b_[l].transpose();
    if (l + 1 < W_.size()) z = z.cwiseMax(0.0);
    cache.acts.push_back(z);
    a = std::move(z);
  }
  return cache.acts.back();
}

Mat Mlp::backward(const Mat& d_out, const MlpCache& cache, MlpGrads& g) const {
  if (g.dW.size() != W_.size()) throw std::invalid_argument("grads shape");
  Mat d = d_out;
  for (int l = static_cast<int>(W_.size()) - 1; l >= 0; --l) {
    const Mat& out_act = cache.acts[static_cast<size_t>(l) + 1];
    if (l + 1 < static_cast<int>(W_.size()))
      d = d.cwiseProduct((out_act.array() > 0.0).cast<double>().matrix());
    const Mat& in_act = cache.acts[static_cast<size_t>(l)];
    g.dW[static_cast<size_t>(l)] += d.transpose() * in_act;
    g.db[static_cast<size_t>(l)] += d.colwise().sum().transpose();
    d = d * W_[static_cast<size_t>(l)];
  }
  return d;
}

MlpGrads Mlp::make_grads() const {
  MlpGrads g;
  for (size_t l = 0; l < W_.size(); ++l) {
    g.dW.push_back(Mat::Zero(W_[l].rows(), W_[l].cols()));
    g.db.push_back(Vec::Zero(b_[l].size()));
  }
  return g;
}

int Mlp::param_count() const {
  int n = 0;
  for (size_t l = 0; l < W_.size(); ++l)
    n += static_cast<int>(W_[l].size() + b_[l].size());
  return n;
}

Vec Mlp::params_flat() const {
  Vec out(param_count());
  Eigen::Index at = 0;
  for (size_t l = 0; l < W_.size(); ++l) {
    for (Eigen::Index r = 0; r < W_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < W_[l].cols(); ++c) out[at++] = W_[l](r, c);
    for (Eigen::Index r = 0; r < b_[l].size(); ++r) out[at++] = b_[l][r];
  }
  return out;
}

void Mlp::set_params_flat(const Vec& theta) {
  if (theta.size() != param_count())
    throw std::invalid_argument("flat parameter size mismatch");
  Eigen::Index at = 0;
  for (size_t l = 0; l < W_.size(); ++l) {
    for (Eigen::Index r = 0; r < W_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < W_[l].cols(); ++c) W_[l](r, c) = theta[at++];
    for (Eigen::Index r = 0; r < b_[l].size(); ++r) b_[l][r] = theta[at++];
  }
}

void Mlp::track(const Mlp& other, double tau) {
  for (size_t l = 0; l < W_.size(); ++l) {
    W_[l] = (1.0 - tau) * W_[l] + tau * other.W_[l];
    b_[l] = (1.0 - tau) * b_[l] + tau * other.b_[l];
  }
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Mlp& net, const MlpGrads& g) {
  if (mW_.empty()) {
    for (size_t l = 0; l < net.weights().size(); ++l) {
      mW_.push_back(Mat::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
      vW_.push_back(Mat::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
      mb_.push_back(Vec::Zero(net.biases()[l].size()));
      vb_.push_back(Vec::Zero(net.biases()[l].size()));
    }
  }
  t_ += 1;
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t l = 0; l < mW_.size(); ++l) {
    mW_[l] = beta1_ * mW_[l] + (1.0 - beta1_) * g.dW[l];
    vW_[l] = beta2_ * vW_[l] + (1.0 - beta2_) * g.dW[l].cwiseProduct(g.dW[l]);
    Mat mhat = mW_[l] / c1;
    Mat vhat = vW_[l] / c2;
    net.weights()[l].array() -=
        lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
    mb_[l] = beta1_ * mb_[l] + (1.0 - beta1_) * g.db[l];
    vb_[l] = beta2_ * vb_[l] + (1.0 - beta2_) * g.db[l].cwiseProduct(g.db[l]);
    Vec mbh = mb_[l] / c1;
    Vec vbh = vb_[l] / c2;
    net.biases()[l].array() -= lr_ * mbh.array() / (vbh.array().sqrt() + eps_);
  }
}

ScalarAdam::ScalarAdam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

double ScalarAdam::delta(double grad) {
  t_ += 1;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad * grad;
  double mhat = m_ / (1.0 - std::pow(beta1_, static_cast<double>(t_)));
  double vhat = v_ / (1.0 - std::pow(beta2_, static_cast<double>(t_)));
  return -lr_ * mhat / (std::sqrt(vhat) + eps_);
}

double softplus(double a) {
  if (a > 0) return a + std::log1p(std::exp(-a));
  return std::log1p(std::exp(a));
}

double log1m_tanh2(double z) {
  // log(1 - tanh(z)^2) = 2 (log 2 - z - softplus(-2z))
  return 2.0 * (std::log(2.0) - z - softplus(-2.0 * z));
}

TanhGaussianSample tanh_gaussian_sample(const Mat& head, const Mat& xi) {
  if (head.cols() % 2 != 0 || head.cols() / 2 != xi.cols() ||
      head.rows() != xi.rows())
    throw std::invalid_argument("tanh gaussian head/noise shape mismatch");
  Eigen::Index d = head.cols() / 2;
  TanhGaussianSample s;
  s.mu = head.leftCols(d);
  Mat raw = head.rightCols(d);
  s.log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  s.std_mask = ((raw.array() > kLogStdMin) && (raw.array() < kLogStdMax))
                   .cast<double>()
                   .matrix();
  Mat std = s.log_std.array().exp().matrix();
  s.pre_tanh = s.mu + std.cwiseProduct(xi);
  s.x = s.pre_tanh.array().tanh().matrix();
  const double half_log_2pi = 0.5 * std::log(2.0 * M_PI);
  s.logp = Vec::Zero(head.rows());
  for (Eigen::Index i = 0; i < head.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      acc += -s.log_std(i, j) - half_log_2pi - 0.5 * xi(i, j) * xi(i, j) -
             log1m_tanh2(s.pre_tanh(i, j));
    }
    s.logp[i] = acc;
  }
  return s;
}

Vec tanh_gaussian_logprob(const Mat& head, const Mat& x) {
  if (head.cols() / 2 != x.cols() || head.rows() != x.rows())
    throw std::invalid_argument("tanh gaussian logprob shape mismatch");
  Eigen::Index d = x.cols();
  const double half_log_2pi = 0.5 * std::log(2.0 * M_PI);
  Vec out(head.rows());
  for (Eigen::Index i = 0; i < head.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      double v = x(i, j);
      if (!(std::abs(v) < 1.0))
        throw std::invalid_argument("tanh gaussian support is (-1, 1)");
      double mu = head(i, j);
      double ls = std::clamp(head(i, d + j), kLogStdMin, kLogStdMax);
      double z = std::atanh(v);
      double u = (z - mu) / std::exp(ls);
      acc += -ls - half_log_2pi - 0.5 * u * u - log1m_tanh2(z);
    }
    out[i] = acc;
  }
  return out;
}

Mat tanh_gaussian_backward(const TanhGaussianSample& s, const Mat& xi,
                           const Mat& d_x, const Vec& w_logp) {
  Eigen::Index n = s.x.rows(), d = s.x.cols();
  Mat out = Mat::Zero(n, 2 * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double x = s.x(i, j);
      double sig = std::exp(s.log_std(i, j));
      double sech2 = 1.0 - x * x;
      double dz = d_x(i, j) * sech2 + w_logp[i] * 2.0 * x;  // dL/dz
      out(i, j) = dz;
      double dls = dz * sig * xi(i, j) - w_logp[i];  // dL/dlog_std
      out(i, d + j) = dls * s.std_mask(i, j);
    }
  }
  return out;
}

Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

Vec entropy_rows(const Mat& probs) {
  Vec out(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      double p = probs(i, j);
      if (p > 0) h -= p * std::log(p);
    }
    out[i] = h;
  }
  return out;
}

int sample_index(const Vec& probs, double u) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

void Checkpoint::put(const std::string& name, const Mat& m) {
  tensors_[name] = m;
}

void Checkpoint::put_scalar(const std::string& name, double v) {
  tensors_[name] = Mat::Constant(1, 1, v);
}

void Checkpoint::put_meta(const std::string& key, const std::string& value) {
  meta_[key] = value;
}

bool Checkpoint::has(const std::string& name) const {
  return tensors_.count(name) > 0;
}

const Mat& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw std::invalid_argument("checkpoint missing tensor: " + name);
  return it->second;
}

double Checkpoint::scalar(const std::string& name) const {
  return tensor(name)(0, 0);
}

std::string Checkpoint::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end())
    throw std::invalid_argument("checkpoint missing meta: " + key);
  return it->second;
}

bool Checkpoint::has_meta(const std::string& key) const {
  return meta_.count(key) > 0;
}

namespace {

constexpr char kMagic[8] = {'M', 'P', 'L', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& os, uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint64_t read_u64(std::istream& is) {
  uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_str(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is) {
  uint64_t n = read_u64(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u64(os, meta_.size());
  for (const auto& [k, v] : meta_) {
    write_str(os, k);
    write_str(os, v);
  }
  write_u64(os, tensors_.size());
  for (const auto& [name, m] : tensors_) {
    write_str(os, name);
    write_u64(os, static_cast<uint64_t>(m.rows()));
    write_u64(os, static_cast<uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      os.write(reinterpret_cast<const char*>(m.row(r).eval().data()),
               static_cast<std::streamsize>(sizeof(double) * m.cols()));
  }
  if (!os) throw std::runtime_error("short write on checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  Checkpoint ck;
  uint64_t n_meta = read_u64(is);
  for (uint64_t i = 0; i < n_meta; ++i) {
    std::string k = read_str(is);
    ck.meta_[k] = read_str(is);
  }
  uint64_t n_tensors = read_u64(is);
  for (uint64_t i = 0; i < n_tensors; ++i) {
    std::string name = read_str(is);
    uint64_t rows = read_u64(is), cols = read_u64(is);
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<double> row(cols);
    for (uint64_t r = 0; r < rows; ++r) {
      is.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * cols));
      for (uint64_t c = 0; c < cols; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            row[c];
    }
    ck.tensors_[name] = std::move(m);
  }
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

void save_mlp(Checkpoint& ck, const std::string& prefix, const Mlp& net) {
  for (size_t l = 0; l < net.weights().size(); ++l) {
    std::string idx = std::to_string(l);
    ck.put(prefix + "/W" + idx, net.weights()[l]);
    ck.put(prefix + "/b" + idx, net.biases()[l]);
  }
}

void load_mlp(const Checkpoint& ck, const std::string& prefix, Mlp& net) {
  for (size_t l = 0; l < net.weights().size(); ++l) {
    std::string idx = std::to_string(l);
    const Mat& W = ck.tensor(prefix + "/W" + idx);
    const Mat& B = ck.tensor(prefix + "/b" + idx);
    if (W.rows() != net.weights()[l].rows() ||
        W.cols() != net.weights()[l].cols())
      throw std::runtime_error("checkpoint weight shape mismatch at " +
                               prefix + "/W" + idx);
    net.weights()[l] = W;
    net.biases()[l] = B.col(0);
  }
}

}  // namespace maple
