#pragma once

#include "fedtrial/dataset.hpp"
#include "fedtrial/parallel.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedtrial::nn {

// Architecture descriptor. `input_dim` is the vocabulary size: the multi-hot
// length for FCN, the token index space for GRU. `hidden_dims` holds the FCN
// layer widths, or exactly one GRU hidden size. Equal specs with equal seeds
// yield identical parameter counts and bit-identical initial parameters.
struct ArchitectureSpec {
    ArchKind kind = ArchKind::FCN;
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int embedding_dim = 0; // GRU only
    std::uint64_t seed = 0;

    bool operator==(const ArchitectureSpec&) const = default;

    void validate() const; // throws ConfigError
};

// One named dense block inside the flat parameter vector. Matrices are
// row-major with `rows` = fan-in and `cols` = fan-out; biases have rows == 1.
struct ParamSegment {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool bias = false;
};

// Canonical layout, layer by layer, weights before biases per layer.
//   FCN: W1, b1, ..., Wn, bn, W_out, b_out
//   GRU: embed, W_z, U_z, W_r, U_r, W_c, U_c, b_z, b_r, b_c, W_out, b_out
// (gate order fixed: update z, reset r, candidate c; W_* consume the token
// embedding, U_* consume the previous hidden state). docs/formats.md has the
// full description.
std::vector<ParamSegment> parameter_layout(const ArchitectureSpec& spec);
std::size_t parameter_count(const ArchitectureSpec& spec);

struct ModelParameters {
    ArchitectureSpec spec;
    std::vector<double> values;
};

// Scaled-uniform init: every weight matrix drawn from
// U(-b, b), b = sqrt(6 / (fan_in + fan_out)); biases zero.
// Deterministic in spec.seed.
ModelParameters init_parameters(const ArchitectureSpec& spec);

// Versioned binary blob: magic "FTPARAMS", u32 version, u32 reserved,
// u64 JSON length, spec JSON (UTF-8), u64 value count, little-endian f64s.
std::string serialize_parameters(const ModelParameters& params);
ModelParameters deserialize_parameters(const std::string& blob);

double sigmoid(double x);

// P(TF) for one multi-hot row. Hidden activations tanh, output sigmoid.
double fcn_forward(const ModelParameters& params, std::span<const double> features);

// P(TF) for one token sequence. Standard GRU cell over embedded tokens,
// zero initial hidden state, sigmoid readout of the final hidden state.
// Empty sequences are allowed.
double gru_forward(const ModelParameters& params, std::span<const std::int32_t> tokens);

// -(y ln p + (1-y) ln(1-p)) with p clamped into [1e-12, 1-1e-12].
double bce_loss(double probability, int label);

// Gradient of the mean batch loss w.r.t. the flat parameter vector, same
// layout as values. Accumulation is chunked with a batch-size-determined
// structure, so Serial and Parallel produce bit-identical results.
// Returns the mean batch loss. `batch` holds row indices into `data`.
struct GradWorkspace {
    std::vector<std::vector<double>> partial_grads;
    std::vector<double> partial_losses;
};

double compute_gradients(const ModelParameters& params, const Dataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad_out,
                         Exec mode = Exec::Serial, GradWorkspace* ws = nullptr);

// Central finite differences of the mean batch loss against the analytic
// gradient; returns max over parameters of |a - n| / max(|a|, |n|, 1e-5).
// The floor compares near-zero gradients absolutely, since below it central
// differences only resolve roundoff. Builds parameters from the spec.
// Intended for small specs (<= ~500 parameters). The whole dataset is the batch.
double finite_difference_check(const ArchitectureSpec& spec, const Dataset& data,
                               double epsilon);

enum class OptKind { SGD, ADAM };

struct OptimizerConfig {
    OptKind kind = OptKind::ADAM;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    OptimizerConfig config;
    std::vector<double> m; // first moment (ADAM)
    std::vector<double> v; // second moment (ADAM)
    std::uint64_t step_count = 0;

    static OptimizerState make(const OptimizerConfig& config, std::size_t param_count);
};

// One in-place update. SGD: values -= lr * grads. ADAM: bias-corrected
// moments. step_count increments by exactly 1. Non-finite gradient entries
// raise NumericError naming the offending index; parameters are checked
// finite afterwards.
void optimizer_step(ModelParameters& params, std::span<const double> grads,
                    OptimizerState& state);

} // namespace fedtrial::nn
