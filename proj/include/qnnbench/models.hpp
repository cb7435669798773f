#pragma once

#include <memory>

#include "qnnbench/classical.hpp"
#include "qnnbench/quantum_conv.hpp"
#include "qnnbench/training.hpp"

namespace qnnbench {

// Methodology-1 classical family: random dense net, MSE loss, scalar score.
class DenseNetModel : public Model {
  public:
    explicit DenseNetModel(DenseNetArchitecture arch) : arch_(std::move(arch)) {}

    const DenseNetArchitecture& architecture() const { return arch_; }
    std::size_t parameter_count() const override { return dense_parameter_count(arch_); }
    void initialize(Rng& rng, std::span<double> params) const override;
    LossKind loss_kind() const override { return LossKind::MeanSquaredError; }
    double batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                           std::span<const double> params, std::span<double> grad) const override;
    double split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                          std::span<const double> params) const override;

  private:
    DenseNetArchitecture arch_;
};

// Methodology-1 quantum family: randomized PQC, squared-error loss,
// expectation-value score. Flat layout [phi | theta | omega].
class QnnModel : public Model {
  public:
    explicit QnnModel(QnnArchitecture arch)
        : arch_(std::move(arch)), counts_(count_parameters(arch_)) {}

    const QnnArchitecture& architecture() const { return arch_; }
    const ParameterCounts& counts() const { return counts_; }
    ParameterSet unflatten(std::span<const double> flat) const {
        return ParameterSet::unflatten(flat, counts_.encoding, counts_.circuit,
                                       counts_.observable);
    }
    std::size_t parameter_count() const override { return counts_.total(); }
    void initialize(Rng& rng, std::span<double> params) const override;
    LossKind loss_kind() const override { return LossKind::SquaredError; }
    double batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                           std::span<const double> params, std::span<double> grad) const override;
    double split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                          std::span<const double> params) const override;

  private:
    QnnArchitecture arch_;
    ParameterCounts counts_;
};

// Methodology-2 classical family: conv + depthwise stack + dense softmax
// head, cross-entropy loss.
class CnnModel : public Model {
  public:
    CnnModel(CnnArchitecture arch, ImageDims dims);

    const CnnArchitecture& architecture() const { return arch_; }
    std::size_t parameter_count() const override;
    void initialize(Rng& rng, std::span<double> params) const override;
    LossKind loss_kind() const override { return LossKind::CrossEntropy; }
    double batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                           std::span<const double> params, std::span<double> grad) const override;
    double split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                          std::span<const double> params) const override;
    std::size_t clamp_events() const override { return clamp_events_; }

    std::array<double, 2> forward(std::span<const double> image,
                                  std::span<const double> params) const;

  private:
    CnnArchitecture arch_;
    ImageDims dims_;
    ConvGeometry geom_;
    std::size_t flat_size_;
    CnnParamCounts counts_;
    mutable std::size_t clamp_events_ = 0;
};

// Methodology-2 hybrid family: one quantum convolution + dense softmax head,
// cross-entropy loss. Flat layout [quantum | dense W | dense b].
class QccnnModel : public Model {
  public:
    QccnnModel(QccnnCircuitSpec spec, ImageDims dims, int n_threads = 1,
               ExecutionCounter* counter = nullptr);

    const QccnnCircuitSpec& spec() const { return spec_; }
    std::size_t quantum_parameter_count() const { return quantum_counts_.total(); }
    std::size_t parameter_count() const override;
    void initialize(Rng& rng, std::span<double> params) const override;
    LossKind loss_kind() const override { return LossKind::CrossEntropy; }
    double batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                           std::span<const double> params, std::span<double> grad) const override;
    double split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                          std::span<const double> params) const override;
    std::size_t clamp_events() const override { return clamp_events_; }

    std::array<double, 2> forward(std::span<const double> image,
                                  std::span<const double> params) const;

  private:
    QccnnCircuitSpec spec_;
    ImageDims dims_;
    ConvGeometry geom_;
    std::size_t flat_size_;
    ParameterCounts quantum_counts_;
    int n_threads_;
    ExecutionCounter* counter_;
    mutable std::size_t clamp_events_ = 0;
};

// Single dense layer with two neurons and softmax on the flattened image.
class BaselineDenseModel : public Model {
  public:
    explicit BaselineDenseModel(ImageDims dims) : dims_(dims) {}

    std::size_t parameter_count() const override { return baseline_dense_parameter_count(dims_); }
    void initialize(Rng& rng, std::span<double> params) const override;
    LossKind loss_kind() const override { return LossKind::CrossEntropy; }
    double batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                           std::span<const double> params, std::span<double> grad) const override;
    double split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                          std::span<const double> params) const override;
    std::size_t clamp_events() const override { return clamp_events_; }

    std::array<double, 2> forward(std::span<const double> image,
                                  std::span<const double> params) const;

  private:
    ImageDims dims_;
    mutable std::size_t clamp_events_ = 0;
};

// Glorot-uniform limit for an affine layer.
double glorot_limit(std::size_t fan_in, std::size_t fan_out);

} // namespace qnnbench
