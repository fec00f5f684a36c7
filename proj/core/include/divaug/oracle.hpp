#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "divaug/image.hpp"
#include "divaug/prob_vector.hpp"

namespace divaug {

enum class ModelKind : std::uint32_t {
  Linear = 0,  ///< flatten -> D logits
  Mlp = 1,     ///< flatten -> hidden, ReLU -> D logits
};

std::string_view to_string(ModelKind kind);

struct Architecture {
  ModelKind kind = ModelKind::Mlp;
  int height = 0;
  int width = 0;
  int channels = 0;
  int hidden = 64;  ///< ignored for Linear
  int classes = 0;

  [[nodiscard]] std::size_t input_size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  [[nodiscard]] std::size_t parameter_count() const;
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Fixed per-channel standardisation applied after scaling pixels to [0, 1].
struct InputNormalization {
  std::vector<double> mean;
  std::vector<double> stddev;

  static InputNormalization identity(int channels);
  /// Statistics over every pixel of every image; stddev floors at 1e-6.
  static InputNormalization fit(std::span<const Image> images);

  friend bool operator==(const InputNormalization&, const InputNormalization&) = default;
};

/// The probability oracle: a small classifier with its parameters in one flat
/// vector. Layout (column-major Eigen blocks):
///   Mlp:    W1 [hidden x in], b1 [hidden], W2 [classes x hidden], b2 [classes]
///   Linear: W  [classes x in], b  [classes]
class OracleModel {
 public:
  OracleModel(Architecture arch, InputNormalization norm, std::vector<double> parameters);

  /// Uniform fan-in initialisation U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static OracleModel initialize(const Architecture& arch, InputNormalization norm, std::uint64_t seed);

  [[nodiscard]] const Architecture& architecture() const { return arch_; }
  [[nodiscard]] const InputNormalization& normalization() const { return norm_; }
  [[nodiscard]] int num_classes() const { return arch_.classes; }
  [[nodiscard]] std::span<const double> parameters() const { return params_; }
  [[nodiscard]] std::span<double> mutable_parameters() { return params_; }

  /// Standardised input column for one image. Throws on shape mismatch.
  [[nodiscard]] Eigen::VectorXd encode(const Image& image) const;

  [[nodiscard]] Eigen::VectorXd logits(const Image& image) const;

  friend bool operator==(const OracleModel&, const OracleModel&) = default;

 private:
  Architecture arch_;
  InputNormalization norm_;
  std::vector<double> params_;
};

/// Max-subtracted softmax.
ProbVector softmax(std::span<const double> logits);

/// Read-only inference; each image is scored independently, so results do not
/// depend on batch composition.
std::vector<ProbVector> predict_proba(const OracleModel& model, std::span<const Image> images);

/// Smallest index among the maxima.
std::size_t argmax(const ProbVector& p);

/// -log p[label]; throws NumericalDomainError when p[label] == 0.
double ce_loss(const ProbVector& p, std::size_t label);

/// Hessian of ce_loss with respect to p: single non-zero 1/p[y]^2 at (y, y).
Eigen::MatrixXd ce_hessian(const ProbVector& p, std::size_t label);

/// Expansion point psi with centred perturbations (mean delta == 0).
struct LossProbe {
  ProbVector psi;
  std::size_t label = 0;
  std::vector<std::vector<double>> deltas;
};

/// |mean_j l(psi + h d_j) - [l(psi) + 1/2 mean_j (h d_j)^T H (h d_j)]|.
/// The first-order term is absent because the deltas are centred.
double taylor_residual(const LossProbe& probe, double h);

/// 1/2 mean_j d_j^T d_j: the second-order term with an identity Hessian.
double identity_hessian_term(std::span<const std::vector<double>> deltas);

/// One plain SGD step on the mean cross-entropy of the batch plus
/// weight_decay/2 * ||theta||^2. Returns the mean cross-entropy before the
/// update. lr == 0 leaves the parameters bit-identical.
double sgd_step(OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels,
                double lr, double weight_decay);

/// Analytic gradient of the mean cross-entropy (without weight decay); used by
/// sgd_step and exposed for gradient checks.
std::vector<double> loss_gradient(const OracleModel& model, std::span<const Image> images,
                                  std::span<const std::size_t> labels, double* mean_loss = nullptr);

/// Mean cross-entropy of the batch under the model.
double mean_loss(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels);

/// Top-1 accuracy, argmax ties to the smallest class index.
double accuracy(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels);

// Checkpoint format, all integers little-endian:
//   offset 0   char[4]  magic "DVAG"
//          4   u32      format version (1)
//          8   u32      model kind (0 linear, 1 mlp)
//         12   u32      height
//         16   u32      width
//         20   u32      channels
//         24   u32      hidden units (0 for linear)
//         28   u32      classes D
//         32   f64[C]   normalisation means, C = channels
//              f64[C]   normalisation standard deviations
//              u64      parameter count P
//              f64[P]   parameters, IEEE-754 binary64 little-endian
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const OracleModel& model, std::ostream& out);
OracleModel load_checkpoint(std::istream& in);
void save_checkpoint(const OracleModel& model, const std::string& path);
OracleModel load_checkpoint(const std::string& path);

}  // namespace divaug
