#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "maple/core.hpp"

namespace maple {

struct MlpCache {
  // acts[0] is the input batch, acts[l] the output of layer l (post ReLU for
  // hidden layers, linear for the last).
  std::vector<Mat> acts;
};

struct MlpGrads {
  std::vector<Mat> dW;
  std::vector<Vec> db;

  void zero();
  Vec flat() const;  // same ordering as Mlp::params_flat
};

// Fully connected net, ReLU hidden layers, linear output. Double precision
// throughout; batches are row-major (one sample per row).
class Mlp {
 public:
  Mlp() = default;
  // sizes = {in, hidden..., out}. Weights start uniform in +-1/sqrt(fan_in),
  // biases at zero; final_scale shrinks the last layer (used to start policy
  // heads near zero).
  Mlp(const std::vector<int>& sizes, std::mt19937_64& rng,
      double final_scale = 1.0);

  int in_dim() const;
  int out_dim() const;
  int layer_count() const { return static_cast<int>(W_.size()); }
  const std::vector<int>& sizes() const { return sizes_; }

  Mat forward(const Mat& X) const;
  Vec forward(const Vec& x) const;
  Mat forward(const Mat& X, MlpCache& cache) const;

  // Accumulates parameter gradients into g and returns dLoss/dInput.
  Mat backward(const Mat& d_out, const MlpCache& cache, MlpGrads& g) const;

  MlpGrads make_grads() const;

  int param_count() const;
  Vec params_flat() const;
  void set_params_flat(const Vec& theta);

  // theta <- (1 - tau) * theta + tau * other, used for target tracking.
  void track(const Mlp& other, double tau);

  std::vector<Mat>& weights() { return W_; }
  std::vector<Vec>& biases() { return b_; }
  const std::vector<Mat>& weights() const { return W_; }
  const std::vector<Vec>& biases() const { return b_; }

 private:
  std::vector<int> sizes_;
  std::vector<Mat> W_;  // layer l: rows = out, cols = in
  std::vector<Vec> b_;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void step(Mlp& net, const MlpGrads& g);
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<Mat> mW_, vW_;
  std::vector<Vec> mb_, vb_;
};

// Adam on a single scalar (the entropy temperatures).
class ScalarAdam {
 public:
  ScalarAdam() = default;
  explicit ScalarAdam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8);
  double delta(double grad);  // returns the increment to apply

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  double m_ = 0, v_ = 0;
  long t_ = 0;
};

double softplus(double a);
double log1m_tanh2(double z);  // log(1 - tanh(z)^2), stable for large |z|

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// One draw from a tanh-squashed diagonal Gaussian. head is [mu | log_std]
// (n x 2d) straight off a network; xi is standard normal noise (n x d).
struct TanhGaussianSample {
  Mat mu;        // n x d
  Mat log_std;   // clamped to [kLogStdMin, kLogStdMax]
  Mat std_mask;  // 1 where the clamp is inactive (gradient passes)
  Mat pre_tanh;  // z = mu + std * xi
  Mat x;         // tanh(z)
  Vec logp;      // n, log density of x including the tanh change of variables
};

TanhGaussianSample tanh_gaussian_sample(const Mat& head, const Mat& xi);

// Log density of given squashed values x (|x| < 1 strictly; throws otherwise).
Vec tanh_gaussian_logprob(const Mat& head, const Mat& x);

// Backpropagates through the sample: d_x is dLoss/dx per element, w_logp the
// per-row weight on logp. Returns dLoss/dhead (n x 2d).
Mat tanh_gaussian_backward(const TanhGaussianSample& s, const Mat& xi,
                           const Mat& d_x, const Vec& w_logp);

Mat softmax_rows(const Mat& logits);
Vec entropy_rows(const Mat& probs);            // -sum p log p per row
int sample_index(const Vec& probs, double u);  // inverse-cdf draw, u in [0,1)

// Named tensor bag with bit-exact binary round trips.
class Checkpoint {
 public:
  void put(const std::string& name, const Mat& m);
  void put_scalar(const std::string& name, double v);
  void put_meta(const std::string& key, const std::string& value);

  bool has(const std::string& name) const;
  const Mat& tensor(const std::string& name) const;
  double scalar(const std::string& name) const;
  std::string meta(const std::string& key) const;
  bool has_meta(const std::string& key) const;

  const std::map<std::string, Mat>& tensors() const { return tensors_; }

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::map<std::string, Mat> tensors_;
  std::map<std::string, std::string> meta_;
};

void save_mlp(Checkpoint& ck, const std::string& prefix, const Mlp& net);
void load_mlp(const Checkpoint& ck, const std::string& prefix, Mlp& net);

}  // namespace maple
