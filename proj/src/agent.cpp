#include "maple/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace maple {
namespace {

double u01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

constexpr int kIndexBins = 16;

}  // namespace

CriticPair::CriticPair(int in_dim, const std::vector<int>& hidden, bool twin,
                       std::mt19937_64& rng)
    : twin_(twin) {
  std::vector<int> sizes;
  sizes.push_back(in_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(1);
  q1_ = Mlp(sizes, rng);
  t1_ = q1_;
  if (twin_) {
    q2_ = Mlp(sizes, rng);
    t2_ = q2_;
  }
}

Vec CriticPair::value(const Mat& X) const {
  Vec v1 = q1_.forward(X).col(0);
  if (!twin_) return v1;
  Vec v2 = q2_.forward(X).col(0);
  return v1.cwiseMin(v2);
}

Vec CriticPair::target_value(const Mat& X) const {
  Vec v1 = t1_.forward(X).col(0);
  if (!twin_) return v1;
  Vec v2 = t2_.forward(X).col(0);
  return v1.cwiseMin(v2);
}

Mat CriticPair::value_input_grad(const Mat& X, const Vec& d_value) const {
  MlpCache c1;
  Mat o1 = q1_.forward(X, c1);
  MlpGrads scratch1 = q1_.make_grads();
  if (!twin_) {
    return q1_.backward(d_value, c1, scratch1);
  }
  MlpCache c2;
  Mat o2 = q2_.forward(X, c2);
  MlpGrads scratch2 = q2_.make_grads();
  Mat d1(X.rows(), 1), d2(X.rows(), 1);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    bool first = o1(i, 0) <= o2(i, 0);
    d1(i, 0) = first ? d_value[i] : 0.0;
    d2(i, 0) = first ? 0.0 : d_value[i];
  }
  return q1_.backward(d1, c1, scratch1) + q2_.backward(d2, c2, scratch2);
}

void CriticPair::track(double tau) {
  t1_.track(q1_, tau);
  if (twin_) t2_.track(q2_, tau);
}

HsacAgent::HsacAgent(const AgentConfig& cfg, const PrimitiveLibrary& lib,
                     uint64_t seed)
    : cfg_(cfg), lib_(lib) {
  if (cfg.obs_dim <= 0) throw std::invalid_argument("obs_dim must be set");
  int k = lib_.size();
  int d_a = lib_.max_param_dim();

  std::mt19937_64 rng(seed);
  std::vector<int> tsk_sizes;
  tsk_sizes.push_back(task_input_dim());
  for (int h : cfg.hidden) tsk_sizes.push_back(h);
  tsk_sizes.push_back(k);
  task_net_ = Mlp(tsk_sizes, rng, cfg.final_layer_scale);

  std::vector<int> par_sizes;
  par_sizes.push_back(cfg.obs_dim);
  for (int h : cfg.hidden) par_sizes.push_back(h);
  par_sizes.push_back(2 * d_a);
  for (int i = 0; i < k; ++i)
    param_nets_.emplace_back(par_sizes, rng, cfg.final_layer_scale);

  critic_ =
      CriticPair(cfg.obs_dim + k + d_a, cfg.hidden, cfg.twin_critics, rng);

  opt_task_ = Adam(cfg.lr);
  opt_q1_ = Adam(cfg.lr);
  opt_q2_ = Adam(cfg.lr);
  for (int i = 0; i < k; ++i) opt_param_.emplace_back(cfg.lr);
  opt_alpha_tsk_ = ScalarAdam(cfg.alpha_lr);
  opt_alpha_p_ = ScalarAdam(cfg.alpha_lr);

  log_alpha_tsk_ = std::log(cfg.init_alpha);
  log_alpha_p_ = std::log(cfg.init_alpha);
  // Exploration-phase targets: maximal type entropy, free parameter noise.
  target_entropy_tsk_ = std::log(static_cast<double>(k));
  target_entropy_p_ = 0.0;
}

int HsacAgent::task_input_dim() const {
  return cfg_.task_input == TaskInput::Observation ? cfg_.obs_dim
                                                   : 1 + kIndexBins;
}

Mat HsacAgent::encode_task_input(const Mat& obs,
                                 const std::vector<int>& decision_index) const {
  if (cfg_.task_input == TaskInput::Observation) return obs;
  Mat out = Mat::Zero(obs.rows(), 1 + kIndexBins);
  for (Eigen::Index i = 0; i < obs.rows(); ++i) {
    int idx = decision_index[static_cast<size_t>(i)];
    out(i, 0) = std::min(idx, cfg_.episode_cap) /
                static_cast<double>(cfg_.episode_cap);
    out(i, 1 + std::min(idx, kIndexBins - 1)) = 1.0;
  }
  return out;
}

Mat HsacAgent::critic_input(const Mat& obs, const std::vector<int>& types,
                            const Mat& params) const {
  int k = lib_.size();
  int d_a = lib_.max_param_dim();
  Mat X = Mat::Zero(obs.rows(), obs.cols() + k + d_a);
  X.leftCols(obs.cols()) = obs;
  for (Eigen::Index i = 0; i < obs.rows(); ++i)
    X(i, obs.cols() + types[static_cast<size_t>(i)]) = 1.0;
  X.rightCols(d_a) = params;
  return X;
}

ParameterizedAction HsacAgent::act(const Vec& obs, int decision_index,
                                   bool greedy, std::mt19937_64& rng) {
  Mat obs_row = obs.transpose();
  Mat tin = encode_task_input(obs_row, {decision_index});
  Vec probs = softmax_rows(task_net_.forward(tin)).row(0).transpose();
  int a;
  if (greedy) {
    Eigen::Index arg;
    probs.maxCoeff(&arg);
    a = static_cast<int>(arg);
  } else {
    a = sample_index(probs, u01(rng));
  }
  ParameterizedAction act;
  act.type = a;
  act.params = sample_params(obs, a, greedy, rng);
  return act;
}

Vec HsacAgent::sample_params(const Vec& obs, int type, bool greedy,
                             std::mt19937_64& rng) const {
  int d_a = lib_.max_param_dim();
  Mat head = param_nets_[static_cast<size_t>(type)].forward(obs).transpose();
  if (greedy)
    return head.leftCols(d_a).row(0).array().tanh().matrix().transpose();
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat xi(1, d_a);
  for (int j = 0; j < d_a; ++j) xi(0, j) = normal(rng);
  TanhGaussianSample s = tanh_gaussian_sample(head, xi);
  return s.x.row(0).transpose();
}

CriticNoise HsacAgent::draw_critic_noise(int n, std::mt19937_64& rng) const {
  CriticNoise cn;
  cn.type_u.resize(n);
  for (int i = 0; i < n; ++i) cn.type_u[i] = u01(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  cn.xi.resize(n, lib_.max_param_dim());
  for (Eigen::Index i = 0; i < cn.xi.rows(); ++i)
    for (Eigen::Index j = 0; j < cn.xi.cols(); ++j) cn.xi(i, j) = normal(rng);
  return cn;
}

PolicyNoise HsacAgent::draw_policy_noise(int n, std::mt19937_64& rng) const {
  PolicyNoise pn;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int a = 0; a < lib_.size(); ++a) {
    Mat xi(n, lib_.max_param_dim());
    for (Eigen::Index i = 0; i < xi.rows(); ++i)
      for (Eigen::Index j = 0; j < xi.cols(); ++j) xi(i, j) = normal(rng);
    pn.xi.push_back(std::move(xi));
  }
  return pn;
}

void HsacAgent::next_actions(const Batch& b, const CriticNoise& noise,
                             std::vector<int>& types, Mat& params,
                             Vec& logp_tsk, Vec& logp_p) const {
  int n = b.size();
  int k = lib_.size();
  int d_a = lib_.max_param_dim();

  Mat tin = encode_task_input(b.next_obs, b.next_decision_index);
  Mat P = softmax_rows(task_net_.forward(tin));

  types.assign(static_cast<size_t>(n), 0);
  logp_tsk = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    int sched = b.next_scheduled_type[static_cast<size_t>(i)];
    if (sched >= 0) {
      types[static_cast<size_t>(i)] = sched;  // schedule acts as the policy
    } else {
      int a = sample_index(P.row(i).transpose(), noise.type_u[i]);
      types[static_cast<size_t>(i)] = a;
      logp_tsk[i] = std::log(P(i, a));
    }
  }

  params.resize(n, d_a);
  logp_p = Vec::Zero(n);
  for (int a = 0; a < k; ++a) {
    std::vector<int> rows;
    for (int i = 0; i < n; ++i)
      if (types[static_cast<size_t>(i)] == a) rows.push_back(i);
    if (rows.empty()) continue;
    Mat obs_a(static_cast<Eigen::Index>(rows.size()), b.next_obs.cols());
    Mat xi_a(static_cast<Eigen::Index>(rows.size()), d_a);
    for (size_t r = 0; r < rows.size(); ++r) {
      obs_a.row(static_cast<Eigen::Index>(r)) = b.next_obs.row(rows[r]);
      xi_a.row(static_cast<Eigen::Index>(r)) = noise.xi.row(rows[r]);
    }
    Mat head = param_nets_[static_cast<size_t>(a)].forward(obs_a);
    TanhGaussianSample s = tanh_gaussian_sample(head, xi_a);
    for (size_t r = 0; r < rows.size(); ++r) {
      params.row(rows[r]) = s.x.row(static_cast<Eigen::Index>(r));
      logp_p[rows[r]] = s.logp[static_cast<Eigen::Index>(r)];
    }
  }
}

double HsacAgent::critic_loss(const Batch& b, const CriticNoise& noise) const {
  MlpGrads g1 = critic_.q1().make_grads();
  MlpGrads g2 = cfg_.twin_critics ? critic_.q2().make_grads() : MlpGrads{};
  return critic_loss_grads(b, noise, g1, g2);
}

double HsacAgent::critic_loss_grads(const Batch& b, const CriticNoise& noise,
                                    MlpGrads& g1, MlpGrads& g2) const {
  int n = b.size();
  std::vector<int> next_types;
  Mat next_params;
  Vec logp_tsk, logp_p;
  next_actions(b, noise, next_types, next_params, logp_tsk, logp_p);

  Mat Xn = critic_input(b.next_obs, next_types, next_params);
  Vec qn = critic_.target_value(Xn);
  double a_tsk = alpha_tsk(), a_p = alpha_p();
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double cont = b.terminal[static_cast<size_t>(i)] ? 0.0 : cfg_.gamma;
    y[i] = b.reward[i] +
           cont * (qn[i] - a_tsk * logp_tsk[i] - a_p * logp_p[i]);
  }

  Mat X = critic_input(b.obs, b.type, b.params);
  // Twins average the two halved squared errors; a single critic keeps the
  // plain mean squared error.
  const double w = cfg_.twin_critics ? 1.0 : 2.0;
  MlpCache c1;
  Vec q1 = critic_.q1().forward(X, c1).col(0);
  double loss = 0.5 * w * (q1 - y).squaredNorm() / static_cast<double>(n);
  critic_.q1().backward(w * (q1 - y) / static_cast<double>(n), c1, g1);
  if (cfg_.twin_critics) {
    MlpCache c2;
    Vec q2 = critic_.q2().forward(X, c2).col(0);
    loss += 0.5 * (q2 - y).squaredNorm() / static_cast<double>(n);
    critic_.q2().backward((q2 - y) / static_cast<double>(n), c2, g2);
  }
  return loss;
}

double HsacAgent::task_policy_loss(const Batch& b,
                                   const PolicyNoise& noise) const {
  MlpGrads g = task_net_.make_grads();
  double entropy;
  return task_policy_loss_grads(b, noise, g, &entropy);
}

double HsacAgent::task_policy_loss_grads(const Batch& b,
                                         const PolicyNoise& noise, MlpGrads& g,
                                         double* entropy) const {
  int n = b.size();
  int k = lib_.size();
  Mat tin = encode_task_input(b.obs, b.decision_index);
  MlpCache cache;
  Mat logits = task_net_.forward(tin, cache);
  Mat P = softmax_rows(logits);
  double a_tsk = alpha_tsk();

  Mat W(n, k);
  for (int a = 0; a < k; ++a) {
    Mat head = param_nets_[static_cast<size_t>(a)].forward(b.obs);
    TanhGaussianSample s =
        tanh_gaussian_sample(head, noise.xi[static_cast<size_t>(a)]);
    std::vector<int> types(static_cast<size_t>(n), a);
    Vec q = critic_.value(critic_input(b.obs, types, s.x));
    for (int i = 0; i < n; ++i)
      W(i, a) = a_tsk * std::log(P(i, a)) - q[i];
  }

  Vec row_dot = P.cwiseProduct(W).rowwise().sum();
  double loss = row_dot.sum() / n;
  Mat dlogits(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a)
      dlogits(i, a) = P(i, a) * (W(i, a) - row_dot[i]) / n;
  task_net_.backward(dlogits, cache, g);
  if (entropy) *entropy = entropy_rows(P).mean();
  return loss;
}

double HsacAgent::param_policy_loss(const Batch& b,
                                    const PolicyNoise& noise) const {
  std::vector<MlpGrads> g;
  for (int a = 0; a < lib_.size(); ++a)
    g.push_back(param_nets_[static_cast<size_t>(a)].make_grads());
  double entropy;
  return param_policy_loss_grads(b, noise, g, &entropy);
}

double HsacAgent::param_policy_loss_grads(const Batch& b,
                                          const PolicyNoise& noise,
                                          std::vector<MlpGrads>& g,
                                          double* entropy) const {
  int n = b.size();
  int k = lib_.size();
  Mat tin = encode_task_input(b.obs, b.decision_index);
  Mat P = softmax_rows(task_net_.forward(tin));
  double a_p = alpha_p();

  double loss = 0.0, ent = 0.0;
  for (int a = 0; a < k; ++a) {
    MlpCache cache;
    Mat head = param_nets_[static_cast<size_t>(a)].forward(b.obs, cache);
    TanhGaussianSample s =
        tanh_gaussian_sample(head, noise.xi[static_cast<size_t>(a)]);
    std::vector<int> types(static_cast<size_t>(n), a);
    Mat X = critic_input(b.obs, types, s.x);
    Vec q = critic_.value(X);
    Vec d_val(n);
    Vec w_logp(n);
    for (int i = 0; i < n; ++i) {
      loss += P(i, a) * (a_p * s.logp[i] - q[i]) / n;
      ent -= P(i, a) * s.logp[i] / n;
      d_val[i] = -P(i, a) / n;
      w_logp[i] = a_p * P(i, a) / n;
    }
    Mat d_input = critic_.value_input_grad(X, d_val);
    Mat d_x = d_input.rightCols(lib_.max_param_dim());
    Mat d_head = tanh_gaussian_backward(s, noise.xi[static_cast<size_t>(a)],
                                        d_x, w_logp);
    param_nets_[static_cast<size_t>(a)].backward(d_head, cache,
                                                 g[static_cast<size_t>(a)]);
  }
  if (entropy) *entropy = ent;
  return loss;
}

double HsacAgent::alpha_tsk_loss(double task_entropy) const {
  return alpha_tsk() * (task_entropy - target_entropy_tsk_);
}

double HsacAgent::alpha_p_loss(double param_entropy) const {
  return alpha_p() * (param_entropy - target_entropy_p_);
}

UpdateStats HsacAgent::update(const Batch& batch, std::mt19937_64& rng) {
  UpdateStats st;
  int k = lib_.size();

  CriticNoise cn = draw_critic_noise(batch.size(), rng);
  MlpGrads g1 = critic_.q1().make_grads();
  MlpGrads g2 =
      cfg_.twin_critics ? critic_.q2().make_grads() : MlpGrads{};
  st.critic_loss = critic_loss_grads(batch, cn, g1, g2);
  opt_q1_.step(critic_.q1(), g1);
  if (cfg_.twin_critics) opt_q2_.step(critic_.q2(), g2);

  PolicyNoise pn = draw_policy_noise(batch.size(), rng);
  bool learn_types = !cfg_.freeze_task_policy && k > 1;
  if (learn_types) {
    MlpGrads gt = task_net_.make_grads();
    st.task_loss = task_policy_loss_grads(batch, pn, gt, &st.task_entropy);
    opt_task_.step(task_net_, gt);
  }

  std::vector<MlpGrads> gp;
  for (int a = 0; a < k; ++a)
    gp.push_back(param_nets_[static_cast<size_t>(a)].make_grads());
  st.param_loss = param_policy_loss_grads(batch, pn, gp, &st.param_entropy);
  for (int a = 0; a < k; ++a)
    opt_param_[static_cast<size_t>(a)].step(param_nets_[static_cast<size_t>(a)],
                                            gp[static_cast<size_t>(a)]);

  if (learn_types) {
    double grad = alpha_tsk() * (st.task_entropy - target_entropy_tsk_);
    log_alpha_tsk_ += opt_alpha_tsk_.delta(grad);
  }
  double grad_p = alpha_p() * (st.param_entropy - target_entropy_p_);
  log_alpha_p_ += opt_alpha_p_.delta(grad_p);

  critic_.track(cfg_.tau_target);

  st.alpha_tsk = alpha_tsk();
  st.alpha_p = alpha_p();
  return st;
}

void HsacAgent::set_entropy_targets(double task_target, double param_target) {
  target_entropy_tsk_ = task_target;
  target_entropy_p_ = param_target;
}

void HsacAgent::save(Checkpoint& ck) const {
  ck.put_meta("kind", "hsac");
  ck.put_meta("primitives", std::to_string(lib_.size()));
  save_mlp(ck, "task", task_net_);
  for (int a = 0; a < lib_.size(); ++a)
    save_mlp(ck, "param" + std::to_string(a), param_nets_[static_cast<size_t>(a)]);
  save_mlp(ck, "q1", critic_.q1());
  save_mlp(ck, "t1", critic_.target1());
  if (cfg_.twin_critics) {
    save_mlp(ck, "q2", critic_.q2());
    save_mlp(ck, "t2", critic_.target2());
  }
  ck.put_scalar("log_alpha_tsk", log_alpha_tsk_);
  ck.put_scalar("log_alpha_p", log_alpha_p_);
  ck.put_scalar("target_entropy_tsk", target_entropy_tsk_);
  ck.put_scalar("target_entropy_p", target_entropy_p_);
}

void HsacAgent::load(const Checkpoint& ck) {
  load_mlp(ck, "task", task_net_);
  for (int a = 0; a < lib_.size(); ++a)
    load_mlp(ck, "param" + std::to_string(a), param_nets_[static_cast<size_t>(a)]);
  load_mlp(ck, "q1", critic_.q1());
  load_mlp(ck, "t1", critic_.target1());
  if (cfg_.twin_critics) {
    load_mlp(ck, "q2", critic_.q2());
    load_mlp(ck, "t2", critic_.target2());
  }
  log_alpha_tsk_ = ck.scalar("log_alpha_tsk");
  log_alpha_p_ = ck.scalar("log_alpha_p");
  target_entropy_tsk_ = ck.scalar("target_entropy_tsk");
  target_entropy_p_ = ck.scalar("target_entropy_p");
}

FlatAgent::FlatAgent(const AgentConfig& cfg, const PrimitiveLibrary& lib,
                     uint64_t seed)
    : cfg_(cfg), lib_(lib) {
  if (cfg.obs_dim <= 0) throw std::invalid_argument("obs_dim must be set");
  int k = lib_.size();
  int d_a = lib_.max_param_dim();
  std::mt19937_64 rng(seed);
  std::vector<int> sizes;
  sizes.push_back(cfg.obs_dim);
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(k + 2 * d_a);
  actor_ = Mlp(sizes, rng, cfg.final_layer_scale);
  critic_ =
      CriticPair(cfg.obs_dim + k + d_a, cfg.hidden, cfg.twin_critics, rng);
  opt_actor_ = Adam(cfg.lr);
  opt_q1_ = Adam(cfg.lr);
  opt_q2_ = Adam(cfg.lr);
  opt_alpha_tsk_ = ScalarAdam(cfg.alpha_lr);
  opt_alpha_p_ = ScalarAdam(cfg.alpha_lr);
  log_alpha_tsk_ = std::log(cfg.init_alpha);
  log_alpha_p_ = std::log(cfg.init_alpha);
  target_entropy_tsk_ = std::log(static_cast<double>(k));
  target_entropy_p_ = 0.0;
}

ParameterizedAction FlatAgent::act(const Vec& obs, int /*decision_index*/,
                                   bool greedy, std::mt19937_64& rng) {
  int k = lib_.size();
  int d_a = lib_.max_param_dim();
  Vec head = actor_.forward(obs);
  Vec probs = softmax_rows(head.head(k).transpose()).row(0).transpose();
  ParameterizedAction act;
  if (greedy) {
    Eigen::Index arg;
    probs.maxCoeff(&arg);
    act.type = static_cast<int>(arg);
    act.params = head.segment(k, d_a).array().tanh().matrix();
    return act;
  }
  act.type = sample_index(probs, u01(rng));
  Mat gauss = head.tail(2 * d_a).transpose();
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat xi(1, d_a);
  for (int j = 0; j < d_a; ++j) xi(0, j) = normal(rng);
  act.params = tanh_gaussian_sample(gauss, xi).x.row(0).transpose();
  return act;
}

double FlatAgent::critic_loss(const Batch& b, const CriticNoise& noise) const {
  MlpGrads g1 = critic_.q1().make_grads();
  MlpGrads g2 = cfg_.twin_critics ? critic_.q2().make_grads() : MlpGrads{};
  return critic_loss_grads(b, noise, g1, g2);
}

double FlatAgent::critic_loss_grads(const Batch& b, const CriticNoise& noise,
                                    MlpGrads& g1, MlpGrads& g2) const {
  int n = b.size();
  int k = lib_.size();
  int d_a = lib_.max_param_dim();

  Mat head = actor_.forward(b.next_obs);
  Mat P = softmax_rows(head.leftCols(k));
  TanhGaussianSample s = tanh_gaussian_sample(head.rightCols(2 * d_a), noise.xi);
  std::vector<int> types(static_cast<size_t>(n), 0);
  Vec logp_tsk = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    int sched = b.next_scheduled_type[static_cast<size_t>(i)];
    int a = sched >= 0 ? sched
                       : sample_index(P.row(i).transpose(), noise.type_u[i]);
    types[static_cast<size_t>(i)] = a;
    if (sched < 0) logp_tsk[i] = std::log(P(i, a));
  }

  Mat Xn = Mat::Zero(n, b.next_obs.cols() + k + d_a);
  Xn.leftCols(b.next_obs.cols()) = b.next_obs;
  for (int i = 0; i < n; ++i)
    Xn(i, b.next_obs.cols() + types[static_cast<size_t>(i)]) = 1.0;
  Xn.rightCols(d_a) = s.x;
  Vec qn = critic_.target_value(Xn);

  double a_tsk = alpha_tsk(), a_p = alpha_p();
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double cont = b.terminal[static_cast<size_t>(i)] ? 0.0 : cfg_.gamma;
    y[i] =
        b.reward[i] + cont * (qn[i] - a_tsk * logp_tsk[i] - a_p * s.logp[i]);
  }

  Mat X = Mat::Zero(n, b.obs.cols() + k + d_a);
  X.leftCols(b.obs.cols()) = b.obs;
  for (int i = 0; i < n; ++i)
    X(i, b.obs.cols() + b.type[static_cast<size_t>(i)]) = 1.0;
  X.rightCols(d_a) = b.params;

  const double w = cfg_.twin_critics ? 1.0 : 2.0;
  MlpCache c1;
  Vec q1 = critic_.q1().forward(X, c1).col(0);
  double loss = 0.5 * w * (q1 - y).squaredNorm() / n;
  critic_.q1().backward(w * (q1 - y) / n, c1, g1);
  if (cfg_.twin_critics) {
    MlpCache c2;
    Vec q2 = critic_.q2().forward(X, c2).col(0);
    loss += 0.5 * (q2 - y).squaredNorm() / n;
    critic_.q2().backward((q2 - y) / n, c2, g2);
  }
  return loss;
}

double FlatAgent::actor_loss(const Batch& b, const Mat& xi) const {
  MlpGrads g = actor_.make_grads();
  double ht, hp;
  return actor_loss_grads(b, xi, g, &ht, &hp);
}

double FlatAgent::actor_loss_grads(const Batch& b, const Mat& xi, MlpGrads& g,
                                   double* task_entropy,
                                   double* param_entropy) const {
  int n = b.size();
  int k = lib_.size();
  int d_a = lib_.max_param_dim();

  MlpCache cache;
  Mat head = actor_.forward(b.obs, cache);
  Mat P = softmax_rows(head.leftCols(k));
  TanhGaussianSample s = tanh_gaussian_sample(head.rightCols(2 * d_a), xi);
  double a_tsk = alpha_tsk(), a_p = alpha_p();

  // One shared parameter sample per state; the type is marginalised exactly.
  Mat W(n, k);
  Mat q_by_type(n, k);
  for (int a = 0; a < k; ++a) {
    Mat X = Mat::Zero(n, b.obs.cols() + k + d_a);
    X.leftCols(b.obs.cols()) = b.obs;
    X.col(b.obs.cols() + a).setOnes();
    X.rightCols(d_a) = s.x;
    Vec q = critic_.value(X);
    q_by_type.col(a) = q;
    for (int i = 0; i < n; ++i)
      W(i, a) = a_tsk * std::log(P(i, a)) - q[i];
  }

  double loss = 0.0;
  Vec row_dot = P.cwiseProduct(W).rowwise().sum();
  loss += row_dot.sum() / n;
  loss += a_p * s.logp.sum() / n;

  Mat d_head = Mat::Zero(n, k + 2 * d_a);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a)
      d_head(i, a) = P(i, a) * (W(i, a) - row_dot[i]) / n;

  // Pathwise term through the shared sample, mixed over types by P.
  Mat d_x = Mat::Zero(n, d_a);
  for (int a = 0; a < k; ++a) {
    Mat X = Mat::Zero(n, b.obs.cols() + k + d_a);
    X.leftCols(b.obs.cols()) = b.obs;
    X.col(b.obs.cols() + a).setOnes();
    X.rightCols(d_a) = s.x;
    Vec d_val(n);
    for (int i = 0; i < n; ++i) d_val[i] = -P(i, a) / n;
    d_x += critic_.value_input_grad(X, d_val).rightCols(d_a);
  }
  Vec w_logp = Vec::Constant(n, a_p / n);
  d_head.rightCols(2 * d_a) = tanh_gaussian_backward(s, xi, d_x, w_logp);
  actor_.backward(d_head, cache, g);

  if (task_entropy) *task_entropy = entropy_rows(P).mean();
  if (param_entropy) *param_entropy = -s.logp.mean();
  return loss;
}

UpdateStats FlatAgent::update(const Batch& batch, std::mt19937_64& rng) {
  UpdateStats st;
  int d_a = lib_.max_param_dim();

  CriticNoise cn;
  cn.type_u.resize(batch.size());
  for (int i = 0; i < batch.size(); ++i) cn.type_u[i] = u01(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  cn.xi.resize(batch.size(), d_a);
  for (Eigen::Index i = 0; i < cn.xi.rows(); ++i)
    for (Eigen::Index j = 0; j < cn.xi.cols(); ++j) cn.xi(i, j) = normal(rng);

  MlpGrads g1 = critic_.q1().make_grads();
  MlpGrads g2 = cfg_.twin_critics ? critic_.q2().make_grads() : MlpGrads{};
  st.critic_loss = critic_loss_grads(batch, cn, g1, g2);
  opt_q1_.step(critic_.q1(), g1);
  if (cfg_.twin_critics) opt_q2_.step(critic_.q2(), g2);

  Mat xi(batch.size(), d_a);
  for (Eigen::Index i = 0; i < xi.rows(); ++i)
    for (Eigen::Index j = 0; j < xi.cols(); ++j) xi(i, j) = normal(rng);
  MlpGrads ga = actor_.make_grads();
  double loss = actor_loss_grads(batch, xi, ga, &st.task_entropy,
                                 &st.param_entropy);
  st.task_loss = loss;
  st.param_loss = loss;
  opt_actor_.step(actor_, ga);

  log_alpha_tsk_ += opt_alpha_tsk_.delta(
      alpha_tsk() * (st.task_entropy - target_entropy_tsk_));
  log_alpha_p_ += opt_alpha_p_.delta(
      alpha_p() * (st.param_entropy - target_entropy_p_));

  critic_.track(cfg_.tau_target);
  st.alpha_tsk = alpha_tsk();
  st.alpha_p = alpha_p();
  return st;
}

void FlatAgent::set_entropy_targets(double task_target, double param_target) {
  target_entropy_tsk_ = task_target;
  target_entropy_p_ = param_target;
}

void FlatAgent::save(Checkpoint& ck) const {
  ck.put_meta("kind", "flat");
  save_mlp(ck, "actor", actor_);
  save_mlp(ck, "q1", critic_.q1());
  save_mlp(ck, "t1", critic_.target1());
  if (cfg_.twin_critics) {
    save_mlp(ck, "q2", critic_.q2());
    save_mlp(ck, "t2", critic_.target2());
  }
  ck.put_scalar("log_alpha_tsk", log_alpha_tsk_);
  ck.put_scalar("log_alpha_p", log_alpha_p_);
  ck.put_scalar("target_entropy_tsk", target_entropy_tsk_);
  ck.put_scalar("target_entropy_p", target_entropy_p_);
}

void FlatAgent::load(const Checkpoint& ck) {
  load_mlp(ck, "actor", actor_);
  load_mlp(ck, "q1", critic_.q1());
  load_mlp(ck, "t1", critic_.target1());
  if (cfg_.twin_critics) {
    load_mlp(ck, "q2", critic_.q2());
    load_mlp(ck, "t2", critic_.target2());
  }
  log_alpha_tsk_ = ck.scalar("log_alpha_tsk");
  log_alpha_p_ = ck.scalar("log_alpha_p");
  target_entropy_tsk_ = ck.scalar("target_entropy_tsk");
  target_entropy_p_ = ck.scalar("target_entropy_p");
}

}  // namespace maple
