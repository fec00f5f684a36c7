#include "divaug/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "divaug/error.hpp"
#include "divaug/random.hpp"

namespace divaug {
namespace {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMatrixMap = Map<const MatrixXd>;
using ConstVectorMap = Map<const VectorXd>;

struct LayerOffsets {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

LayerOffsets offsets(const Architecture& a) {
  LayerOffsets o;
  const std::size_t in = a.input_size();
  if (a.kind == ModelKind::Linear) {
    o.w2 = 0;
    o.b2 = static_cast<std::size_t>(a.classes) * in;
  } else {
    o.w1 = 0;
    o.b1 = static_cast<std::size_t>(a.hidden) * in;
    o.w2 = o.b1 + a.hidden;
    o.b2 = o.w2 + static_cast<std::size_t>(a.classes) * a.hidden;
  }
  return o;
}

void check_labels(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels) {
  if (images.size() != labels.size()) throw InvalidArgument("batch: image and label counts differ");
  for (std::size_t y : labels) {
    if (y >= static_cast<std::size_t>(model.num_classes())) {
      throw InvalidArgument("batch: label " + std::to_string(y) + " out of range");
    }
  }
}

MatrixXd encode_batch(const OracleModel& model, std::span<const Image> images) {
  MatrixXd x(model.architecture().input_size(), static_cast<Eigen::Index>(images.size()));
  for (std::size_t i = 0; i < images.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = model.encode(images[i]);
  return x;
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Linear ? "linear" : "mlp"; }

std::size_t Architecture::parameter_count() const {
  const std::size_t in = input_size();
  if (kind == ModelKind::Linear) return static_cast<std::size_t>(classes) * (in + 1);
  return static_cast<std::size_t>(hidden) * (in + 1) + static_cast<std::size_t>(classes) * (hidden + 1);
}

void Architecture::validate() const {
  if (height <= 0 || width <= 0 || (channels != 1 && channels != 3)) {
    throw InvalidArgument("Architecture: invalid input shape");
  }
  if (classes < 2) throw InvalidArgument("Architecture: need at least 2 classes");
  if (kind == ModelKind::Mlp && hidden <= 0) throw InvalidArgument("Architecture: hidden units must be positive");
  if (kind != ModelKind::Mlp && kind != ModelKind::Linear) throw InvalidArgument("Architecture: unknown model kind");
}

InputNormalization InputNormalization::identity(int channels) {
  return {std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0)};
}

InputNormalization InputNormalization::fit(std::span<const Image> images) {
  if (images.empty()) throw InvalidArgument("InputNormalization::fit: no images");
  const int channels = images.front().channels;
  std::vector<double> sum(channels, 0.0), sq(channels, 0.0);
  double count = 0.0;
  for (const auto& image : images) {
    if (image.channels != channels) throw InvalidArgument("InputNormalization::fit: mixed channel counts");
    for (std::size_t i = 0; i < image.size(); ++i) {
      const double v = image.pixels[i] / 255.0;
      sum[i % channels] += v;
      sq[i % channels] += v * v;
    }
    count += static_cast<double>(image.size() / channels);
  }
  InputNormalization norm;
  for (int c = 0; c < channels; ++c) {
    const double mean = sum[c] / count;
    const double var = std::max(sq[c] / count - mean * mean, 0.0);
    norm.mean.push_back(mean);
    norm.stddev.push_back(std::max(std::sqrt(var), 1e-6));
  }
  return norm;
}

OracleModel::OracleModel(Architecture arch, InputNormalization norm, std::vector<double> parameters)
    : arch_(arch), norm_(std::move(norm)), params_(std::move(parameters)) {
  arch_.validate();
  if (arch_.kind == ModelKind::Linear) arch_.hidden = 0;
  if (norm_.mean.size() != static_cast<std::size_t>(arch_.channels) || norm_.stddev.size() != norm_.mean.size()) {
    throw InvalidArgument("OracleModel: normalisation does not match channel count");
  }
  if (params_.size() != arch_.parameter_count()) {
    throw InvalidArgument("OracleModel: expected " + std::to_string(arch_.parameter_count()) +
                          " parameters, got " + std::to_string(params_.size()));
  }
}

OracleModel OracleModel::initialize(const Architecture& arch, InputNormalization norm, std::uint64_t seed) {
  arch.validate();
  RandomStream rng(seed);
  std::vector<double> params(arch.parameter_count());
  const LayerOffsets o = offsets(arch);
  const auto fill = [&](std::size_t begin, std::size_t end, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (std::size_t i = begin; i < end; ++i) params[i] = (2.0 * rng.uniform() - 1.0) * bound;
  };
  const auto in = static_cast<double>(arch.input_size());
  if (arch.kind == ModelKind::Linear) {
    fill(0, params.size(), in);
  } else {
    fill(o.w1, o.w2, in);
    fill(o.w2, params.size(), arch.hidden);
  }
  return OracleModel(arch, std::move(norm), std::move(params));
}

VectorXd OracleModel::encode(const Image& image) const {
  if (image.height != arch_.height || image.width != arch_.width || image.channels != arch_.channels ||
      image.size() != arch_.input_size()) {
    throw InvalidArgument("OracleModel: image shape does not match the model input");
  }
  VectorXd x(static_cast<Eigen::Index>(image.size()));
  const std::size_t channels = arch_.channels;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const std::size_t c = i % channels;
    x[static_cast<Eigen::Index>(i)] = (image.pixels[i] / 255.0 - norm_.mean[c]) / norm_.stddev[c];
  }
  return x;
}

VectorXd OracleModel::logits(const Image& image) const {
  const VectorXd x = encode(image);
  const LayerOffsets o = offsets(arch_);
  const auto in = static_cast<Eigen::Index>(arch_.input_size());
  const Eigen::Index d = arch_.classes;
  if (arch_.kind == ModelKind::Linear) {
    ConstMatrixMap w(params_.data() + o.w2, d, in);
    ConstVectorMap b(params_.data() + o.b2, d);
    return w * x + b;
  }
  const Eigen::Index h = arch_.hidden;
  ConstMatrixMap w1(params_.data() + o.w1, h, in);
  ConstVectorMap b1(params_.data() + o.b1, h);
  ConstMatrixMap w2(params_.data() + o.w2, d, h);
  ConstVectorMap b2(params_.data() + o.b2, d);
  const VectorXd hidden = (w1 * x + b1).cwiseMax(0.0);
  return w2 * hidden + b2;
}

ProbVector softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgument("softmax: empty logits");
  const double peak = *std::max_element(logits.begin(), logits.end());
  ProbVector p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - peak);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<ProbVector> predict_proba(const OracleModel& model, std::span<const Image> images) {
  std::vector<ProbVector> out;
  out.reserve(images.size());
  for (const auto& image : images) {
    const VectorXd z = model.logits(image);
    out.push_back(softmax(std::span<const double>(z.data(), static_cast<std::size_t>(z.size()))));
  }
  return out;
}

bool is_prob_vector(const ProbVector& p, double tolerance) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

std::size_t argmax(const ProbVector& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double ce_loss(const ProbVector& p, std::size_t label) {
  if (label >= p.size()) throw InvalidArgument("ce_loss: label out of range");
  if (!(p[label] > 0.0)) throw NumericalDomainError("ce_loss: zero probability at the true label");
  return -std::log(p[label]);
}

MatrixXd ce_hessian(const ProbVector& p, std::size_t label) {
  if (label >= p.size()) throw InvalidArgument("ce_hessian: label out of range");
  if (!(p[label] > 0.0)) throw NumericalDomainError("ce_hessian: zero probability at the true label");
  const auto d = static_cast<Eigen::Index>(p.size());
  MatrixXd hessian = MatrixXd::Zero(d, d);
  hessian(static_cast<Eigen::Index>(label), static_cast<Eigen::Index>(label)) = 1.0 / (p[label] * p[label]);
  return hessian;
}

double taylor_residual(const LossProbe& probe, double h) {
  const std::size_t d = probe.psi.size();
  if (!is_prob_vector(probe.psi)) throw InvalidArgument("taylor_residual: psi is not a probability vector");
  if (probe.label >= d) throw InvalidArgument("taylor_residual: label out of range");
  if (probe.deltas.empty()) throw InvalidArgument("taylor_residual: no perturbations");

  std::vector<double> centre(d, 0.0);
  double scale = 0.0;
  for (const auto& delta : probe.deltas) {
    if (delta.size() != d) throw InvalidArgument("taylor_residual: delta dimension mismatch");
    for (std::size_t k = 0; k < d; ++k) {
      centre[k] += delta[k];
      scale = std::max(scale, std::abs(delta[k]));
    }
  }
  for (double c : centre) {
    if (std::abs(c / static_cast<double>(probe.deltas.size())) > 1e-9 * std::max(1.0, scale)) {
      throw InvalidArgument("taylor_residual: perturbations are not centred");
    }
  }

  const MatrixXd hessian = ce_hessian(probe.psi, probe.label);
  const double base = ce_loss(probe.psi, probe.label);
  double perturbed = 0.0;
  double quadratic = 0.0;
  for (const auto& delta : probe.deltas) {
    ProbVector q(d);
    VectorXd step(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      step[static_cast<Eigen::Index>(k)] = h * delta[k];
      q[k] = probe.psi[k] + h * delta[k];
      if (!(q[k] > 0.0 && q[k] <= 1.0)) {
        throw InvalidArgument("taylor_residual: perturbed vector leaves the simplex");
      }
    }
    if (!is_prob_vector(q)) throw InvalidArgument("taylor_residual: perturbed vector does not sum to one");
    perturbed += ce_loss(q, probe.label);
    quadratic += step.dot(hessian * step);
  }
  const auto n = static_cast<double>(probe.deltas.size());
  return std::abs(perturbed / n - (base + 0.5 * quadratic / n));
}

double identity_hessian_term(std::span<const std::vector<double>> deltas) {
  if (deltas.empty()) throw InvalidArgument("identity_hessian_term: no perturbations");
  double total = 0.0;
  for (const auto& delta : deltas) {
    for (double v : delta) total += v * v;
  }
  return 0.5 * total / static_cast<double>(deltas.size());
}

std::vector<double> loss_gradient(const OracleModel& model, std::span<const Image> images,
                                  std::span<const std::size_t> labels, double* mean_loss_out) {
  check_labels(model, images, labels);
  if (images.empty()) throw InvalidArgument("loss_gradient: empty batch");
  const Architecture& a = model.architecture();
  const LayerOffsets o = offsets(a);
  const auto in = static_cast<Eigen::Index>(a.input_size());
  const Eigen::Index d = a.classes;
  const auto batch = static_cast<Eigen::Index>(images.size());
  const double* theta = model.parameters().data();

  const MatrixXd x = encode_batch(model, images);
  MatrixXd hidden;
  MatrixXd z;
  if (a.kind == ModelKind::Linear) {
    z = ConstMatrixMap(theta + o.w2, d, in) * x;
  } else {
    hidden = ConstMatrixMap(theta + o.w1, a.hidden, in) * x;
    hidden.colwise() += ConstVectorMap(theta + o.b1, a.hidden);
    hidden = hidden.cwiseMax(0.0);
    z = ConstMatrixMap(theta + o.w2, d, a.hidden) * hidden;
  }
  z.colwise() += ConstVectorMap(theta + o.b2, d);

  // dL/dz = (softmax(z) - onehot(y)) / B
  double loss = 0.0;
  MatrixXd dz(d, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const VectorXd col = z.col(j);
    const ProbVector p = softmax(std::span<const double>(col.data(), static_cast<std::size_t>(d)));
    const auto y = labels[static_cast<std::size_t>(j)];
    loss += p[y] > 0.0 ? -std::log(p[y]) : std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d; ++k) dz(k, j) = p[static_cast<std::size_t>(k)];
    dz(static_cast<Eigen::Index>(y), j) -= 1.0;
  }
  dz /= static_cast<double>(batch);
  if (mean_loss_out != nullptr) *mean_loss_out = loss / static_cast<double>(batch);

  std::vector<double> grad(a.parameter_count(), 0.0);
  if (a.kind == ModelKind::Linear) {
    Map<MatrixXd>(grad.data() + o.w2, d, in) = dz * x.transpose();
    Map<VectorXd>(grad.data() + o.b2, d) = dz.rowwise().sum();
    return grad;
  }
  Map<MatrixXd>(grad.data() + o.w2, d, a.hidden) = dz * hidden.transpose();
  Map<VectorXd>(grad.data() + o.b2, d) = dz.rowwise().sum();
  MatrixXd dh = ConstMatrixMap(theta + o.w2, d, a.hidden).transpose() * dz;
  dh = dh.cwiseProduct((hidden.array() > 0.0).cast<double>().matrix());
  Map<MatrixXd>(grad.data() + o.w1, a.hidden, in) = dh * x.transpose();
  Map<VectorXd>(grad.data() + o.b1, a.hidden) = dh.rowwise().sum();
  return grad;
}

double sgd_step(OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels, double lr,
                double weight_decay) {
  if (!(lr >= 0.0)) throw InvalidArgument("sgd_step: learning rate must be non-negative");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("sgd_step: weight decay must be non-negative");
  double loss = 0.0;
  const std::vector<double> grad = loss_gradient(model, images, labels, &loss);
  if (!std::isfinite(loss)) {
    throw DivergenceError("sgd_step: non-finite loss (" + std::to_string(loss) + ")");
  }
  if (lr == 0.0) return loss;
  auto theta = model.mutable_parameters();
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * (grad[i] + weight_decay * theta[i]);
  return loss;
}

double mean_loss(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels) {
  check_labels(model, images, labels);
  if (images.empty()) throw InvalidArgument("mean_loss: empty set");
  const auto probs = predict_proba(model, images);
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) total += ce_loss(probs[i], labels[i]);
  return total / static_cast<double>(probs.size());
}

double accuracy(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels) {
  check_labels(model, images, labels);
  if (images.empty()) throw InvalidArgument("accuracy: empty set");
  const auto probs = predict_proba(model, images);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) hits += argmax(probs[i]) == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(probs.size());
}

}  // namespace divaug
