#include "fedtrial/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedtrial/errors.hpp"

namespace fedtrial::nn {

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double bce_loss(double p, int label) {
    if (label != 0 && label != 1)
        throw ShapeError("bce_loss: label must be 0 or 1, got " + std::to_string(label));
    constexpr double kEps = 1e-12;
    const double q = std::clamp(p, kEps, 1.0 - kEps);
    return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

namespace {

// Name-free offset views of the flat parameter vector; cheap enough to build
// per batch and reuse across examples.
struct FcnView {
    std::vector<int> dims;         // input, hidden..., 1
    std::vector<std::size_t> w;    // per layer
    std::vector<std::size_t> b;
};

struct GruView {
    int V = 0, E = 0, H = 0;
    std::size_t embed = 0;
    std::size_t Wz = 0, Uz = 0, Wr = 0, Ur = 0, Wc = 0, Uc = 0;
    std::size_t bz = 0, br = 0, bc = 0;
    std::size_t Wo = 0, bo = 0;
};

FcnView make_fcn_view(const ArchitectureSpec& spec) {
    FcnView v;
    v.dims.push_back(spec.input_dim);
    v.dims.insert(v.dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
    v.dims.push_back(1);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < v.dims.size(); ++l) {
        v.w.push_back(off);
        off += static_cast<std::size_t>(v.dims[l]) * static_cast<std::size_t>(v.dims[l + 1]);
        v.b.push_back(off);
        off += static_cast<std::size_t>(v.dims[l + 1]);
    }
    return v;
}

GruView make_gru_view(const ArchitectureSpec& spec) {
    GruView v;
    v.V = spec.input_dim;
    v.E = spec.embedding_dim;
    v.H = spec.hidden_dims[0];
    const auto V = static_cast<std::size_t>(v.V);
    const auto E = static_cast<std::size_t>(v.E);
    const auto H = static_cast<std::size_t>(v.H);
    std::size_t off = 0;
    v.embed = off; off += V * E;
    v.Wz = off; off += E * H;
    v.Uz = off; off += H * H;
    v.Wr = off; off += E * H;
    v.Ur = off; off += H * H;
    v.Wc = off; off += E * H;
    v.Uc = off; off += H * H;
    v.bz = off; off += H;
    v.br = off; off += H;
    v.bc = off; off += H;
    v.Wo = off; off += H;
    v.bo = off;
    return v;
}

// a[j] = bias[j] + sum_i x[i] * W[i*cols + j]
void affine(const double* W, const double* bias, const double* x, int rows, int cols, double* out) {
    for (int j = 0; j < cols; ++j)
        out[j] = bias[j];
    for (int i = 0; i < rows; ++i) {
        const double xi = x[i];
        const double* wrow = W + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j)
            out[j] += xi * wrow[j];
    }
}

// out[j] += sum_i x[i] * W[i*cols + j]
void accumulate_matvec(const double* W, const double* x, int rows, int cols, double* out) {
    for (int i = 0; i < rows; ++i) {
        const double xi = x[i];
        const double* wrow = W + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j)
            out[j] += xi * wrow[j];
    }
}

struct FcnScratch {
    std::vector<std::vector<double>> act;   // act[l], l = 0..L (act[0] = input copy)
    std::vector<double> delta, delta_prev;
};

// Forward returning the logit; activations stored for backward.
double fcn_logit(const ModelParameters& params, const FcnView& v, std::span<const double> x,
                 FcnScratch& s) {
    const std::size_t nlayers = v.w.size();
    s.act.resize(nlayers + 1);
    s.act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < nlayers; ++l) {
        const int rows = v.dims[l];
        const int cols = v.dims[l + 1];
        s.act[l + 1].resize(static_cast<std::size_t>(cols));
        affine(params.values.data() + v.w[l], params.values.data() + v.b[l], s.act[l].data(), rows,
               cols, s.act[l + 1].data());
        if (l + 1 < nlayers)
            for (double& a : s.act[l + 1])
                a = std::tanh(a);
    }
    return s.act[nlayers][0];
}

// Accumulates the raw (unscaled) gradient for one example into grad; returns the loss.
double fcn_example_grad(const ModelParameters& params, const FcnView& v, std::span<const double> x,
                        int label, double* grad, FcnScratch& s) {
    const double logit = fcn_logit(params, v, x, s);
    const double p = sigmoid(logit);
    const double loss = bce_loss(p, label);
    const std::size_t nlayers = v.w.size();

    // dL/dlogit for sigmoid + BCE collapses to p - y.
    s.delta.assign(1, p - static_cast<double>(label));
    for (std::size_t l = nlayers; l-- > 0;) {
        const int rows = v.dims[l];
        const int cols = v.dims[l + 1];
        const double* in = s.act[l].data();
        double* gw = grad + v.w[l];
        double* gb = grad + v.b[l];
        for (int j = 0; j < cols; ++j)
            gb[j] += s.delta[j];
        for (int i = 0; i < rows; ++i) {
            const double xi = in[i];
            double* grow = gw + static_cast<std::size_t>(i) * cols;
            for (int j = 0; j < cols; ++j)
                grow[j] += xi * s.delta[j];
        }
        if (l == 0)
            break;
        const double* W = params.values.data() + v.w[l];
        s.delta_prev.assign(static_cast<std::size_t>(rows), 0.0);
        for (int i = 0; i < rows; ++i) {
            const double* wrow = W + static_cast<std::size_t>(i) * cols;
            double acc = 0.0;
            for (int j = 0; j < cols; ++j)
                acc += wrow[j] * s.delta[j];
            // act[l] holds tanh outputs, so the derivative is 1 - a^2.
            s.delta_prev[i] = acc * (1.0 - in[i] * in[i]);
        }
        std::swap(s.delta, s.delta_prev);
    }
    return loss;
}

struct GruScratch {
    std::vector<double> z, r, c, h, s;      // T * H each (s = r ⊙ h_prev)
    std::vector<double> gh, ghprev, daz, dar, dac, ds, dx;
};

// Runs the recurrence storing per-step gates; returns the logit.
double gru_logit(const ModelParameters& params, const GruView& v, std::span<const std::int32_t> seq,
                 GruScratch& s) {
    const int H = v.H;
    const int E = v.E;
    const std::size_t T = seq.size();
    const double* p = params.values.data();
    s.z.assign(T * H, 0.0);
    s.r.assign(T * H, 0.0);
    s.c.assign(T * H, 0.0);
    s.h.assign(T * H, 0.0);
    s.s.assign(T * H, 0.0);

    std::vector<double> hcur(static_cast<std::size_t>(H), 0.0);
    std::vector<double> a(static_cast<std::size_t>(H));
    for (std::size_t t = 0; t < T; ++t) {
        const std::int32_t tok = seq[t];
        if (tok < 0 || tok >= v.V)
            throw EncodingError("gru: token index " + std::to_string(tok) + " outside vocabulary of " +
                                std::to_string(v.V));
        const double* x = p + v.embed + static_cast<std::size_t>(tok) * E;
        double* zt = s.z.data() + t * H;
        double* rt = s.r.data() + t * H;
        double* ct = s.c.data() + t * H;
        double* st = s.s.data() + t * H;

        affine(p + v.Wz, p + v.bz, x, E, H, a.data());
        accumulate_matvec(p + v.Uz, hcur.data(), H, H, a.data());
        for (int j = 0; j < H; ++j)
            zt[j] = sigmoid(a[j]);

        affine(p + v.Wr, p + v.br, x, E, H, a.data());
        accumulate_matvec(p + v.Ur, hcur.data(), H, H, a.data());
        for (int j = 0; j < H; ++j)
            rt[j] = sigmoid(a[j]);

        for (int j = 0; j < H; ++j)
            st[j] = rt[j] * hcur[j];
        affine(p + v.Wc, p + v.bc, x, E, H, a.data());
        accumulate_matvec(p + v.Uc, st, H, H, a.data());
        for (int j = 0; j < H; ++j)
            ct[j] = std::tanh(a[j]);

        for (int j = 0; j < H; ++j)
            hcur[j] = (1.0 - zt[j]) * ct[j] + zt[j] * hcur[j];
        std::copy(hcur.begin(), hcur.end(), s.h.data() + t * H);
    }

    double logit = p[v.bo];
    for (int j = 0; j < H; ++j)
        logit += hcur[j] * p[v.Wo + j];
    return logit;
}

double gru_example_grad(const ModelParameters& params, const GruView& v,
                        std::span<const std::int32_t> seq, int label, double* grad, GruScratch& s) {
    const double logit = gru_logit(params, v, seq, s);
    const double prob = sigmoid(logit);
    const double loss = bce_loss(prob, label);
    const int H = v.H;
    const int E = v.E;
    const std::size_t T = seq.size();
    const double* p = params.values.data();
    const double delta = prob - static_cast<double>(label);

    const double* hT = T > 0 ? s.h.data() + (T - 1) * H : nullptr;
    grad[v.bo] += delta;
    s.gh.assign(static_cast<std::size_t>(H), 0.0);
    for (int j = 0; j < H; ++j) {
        grad[v.Wo + j] += (T > 0 ? hT[j] : 0.0) * delta;
        s.gh[j] = p[v.Wo + j] * delta;
    }
    if (T == 0)
        return loss;  // empty sequence: readout of the zero state, nothing upstream

    s.ghprev.assign(static_cast<std::size_t>(H), 0.0);
    s.daz.resize(static_cast<std::size_t>(H));
    s.dar.resize(static_cast<std::size_t>(H));
    s.dac.resize(static_cast<std::size_t>(H));
    s.ds.resize(static_cast<std::size_t>(H));
    s.dx.resize(static_cast<std::size_t>(E));

    for (std::size_t t = T; t-- > 0;) {
        const std::int32_t tok = seq[t];
        const double* x = p + v.embed + static_cast<std::size_t>(tok) * E;
        const double* zt = s.z.data() + t * H;
        const double* rt = s.r.data() + t * H;
        const double* ct = s.c.data() + t * H;
        const double* st = s.s.data() + t * H;
        const double* hprev = t > 0 ? s.h.data() + (t - 1) * H : nullptr;

        // h' = (1 - z) ⊙ c + z ⊙ h
        for (int j = 0; j < H; ++j) {
            const double hp = hprev ? hprev[j] : 0.0;
            const double gh = s.gh[j];
            const double dz = gh * (hp - ct[j]);
            const double dc = gh * (1.0 - zt[j]);
            s.ghprev[j] = gh * zt[j];
            s.dac[j] = dc * (1.0 - ct[j] * ct[j]);
            s.daz[j] = dz * zt[j] * (1.0 - zt[j]);
        }

        // candidate: c = tanh(Wc·x + Uc·(r ⊙ h) + bc)
        for (int j = 0; j < H; ++j)
            grad[v.bc + j] += s.dac[j];
        for (int i = 0; i < E; ++i) {
            double* grow = grad + v.Wc + static_cast<std::size_t>(i) * H;
            for (int j = 0; j < H; ++j)
                grow[j] += x[i] * s.dac[j];
        }
        for (int i = 0; i < H; ++i) {
            double* grow = grad + v.Uc + static_cast<std::size_t>(i) * H;
            const double* urow = p + v.Uc + static_cast<std::size_t>(i) * H;
            double acc = 0.0;
            for (int j = 0; j < H; ++j) {
                grow[j] += st[i] * s.dac[j];
                acc += urow[j] * s.dac[j];
            }
            s.ds[i] = acc;
        }

        // s = r ⊙ h_prev feeds both the reset gate path and h_prev
        for (int i = 0; i < H; ++i) {
            const double hp = hprev ? hprev[i] : 0.0;
            const double dr = s.ds[i] * hp;
            s.dar[i] = dr * rt[i] * (1.0 - rt[i]);
            s.ghprev[i] += s.ds[i] * rt[i];
        }
        for (int j = 0; j < H; ++j) {
            grad[v.br + j] += s.dar[j];
            grad[v.bz + j] += s.daz[j];
        }
        for (int i = 0; i < E; ++i) {
            double* grow_r = grad + v.Wr + static_cast<std::size_t>(i) * H;
            double* grow_z = grad + v.Wz + static_cast<std::size_t>(i) * H;
            for (int j = 0; j < H; ++j) {
                grow_r[j] += x[i] * s.dar[j];
                grow_z[j] += x[i] * s.daz[j];
            }
        }
        for (int i = 0; i < H; ++i) {
            const double hp = hprev ? hprev[i] : 0.0;
            double* grow_r = grad + v.Ur + static_cast<std::size_t>(i) * H;
            double* grow_z = grad + v.Uz + static_cast<std::size_t>(i) * H;
            const double* urow_r = p + v.Ur + static_cast<std::size_t>(i) * H;
            const double* urow_z = p + v.Uz + static_cast<std::size_t>(i) * H;
            double acc = 0.0;
            for (int j = 0; j < H; ++j) {
                grow_r[j] += hp * s.dar[j];
                grow_z[j] += hp * s.daz[j];
                acc += urow_r[j] * s.dar[j] + urow_z[j] * s.daz[j];
            }
            s.ghprev[i] += acc;
        }

        // input gradient flows into the embedding row of this token
        for (int i = 0; i < E; ++i) {
            const double* wrow_z = p + v.Wz + static_cast<std::size_t>(i) * H;
            const double* wrow_r = p + v.Wr + static_cast<std::size_t>(i) * H;
            const double* wrow_c = p + v.Wc + static_cast<std::size_t>(i) * H;
            double acc = 0.0;
            for (int j = 0; j < H; ++j)
                acc += wrow_z[j] * s.daz[j] + wrow_r[j] * s.dar[j] + wrow_c[j] * s.dac[j];
            s.dx[i] = acc;
        }
        double* gemb = grad + v.embed + static_cast<std::size_t>(tok) * E;
        for (int i = 0; i < E; ++i)
            gemb[i] += s.dx[i];

        std::swap(s.gh, s.ghprev);
    }
    return loss;
}

}  // namespace

double fcn_forward(const ModelParameters& params, std::span<const double> features) {
    if (params.spec.kind != ArchKind::FCN)
        throw ShapeError("fcn_forward: parameters are not an FCN");
    if (static_cast<int>(features.size()) != params.spec.input_dim)
        throw ShapeError("fcn_forward: feature length " + std::to_string(features.size()) +
                         " does not match input_dim " + std::to_string(params.spec.input_dim));
    const FcnView v = make_fcn_view(params.spec);
    FcnScratch s;
    return sigmoid(fcn_logit(params, v, features, s));
}

double gru_forward(const ModelParameters& params, std::span<const std::int32_t> sequence) {
    if (params.spec.kind != ArchKind::GRU)
        throw ShapeError("gru_forward: parameters are not a GRU");
    const GruView v = make_gru_view(params.spec);
    GruScratch s;
    return sigmoid(gru_logit(params, v, sequence, s));
}

double compute_gradients(const ModelParameters& params, const Dataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad_out, Exec mode,
                         GradWorkspace* ws) {
    if (batch.empty())
        throw ShapeError("compute_gradients: empty batch");
    if (params.spec.kind != data.kind)
        throw ShapeError("compute_gradients: dataset encoding does not match the architecture");
    if (data.feature_dim != params.spec.input_dim)
        throw ShapeError("compute_gradients: dataset feature_dim " + std::to_string(data.feature_dim) +
                         " does not match input_dim " + std::to_string(params.spec.input_dim));
    const std::size_t pcount = parameter_count(params.spec);
    if (grad_out.size() != pcount)
        throw ShapeError("compute_gradients: gradient buffer has wrong length");
    for (std::size_t idx : batch)
        if (idx >= data.size())
            throw ShapeError("compute_gradients: batch index " + std::to_string(idx) + " out of range");

    // Fixed chunking keeps the reduction order independent of thread count, so
    // serial and parallel runs produce bit-identical gradients.
    const std::size_t B = batch.size();
    const std::size_t nchunks = std::min<std::size_t>(B, 64);
    GradWorkspace local;
    GradWorkspace& w = ws ? *ws : local;
    w.partial_grads.resize(nchunks);
    w.partial_losses.assign(nchunks, 0.0);

    const bool fcn = params.spec.kind == ArchKind::FCN;
    const FcnView fv = fcn ? make_fcn_view(params.spec) : FcnView{};
    const GruView gv = fcn ? GruView{} : make_gru_view(params.spec);

    parallel_for(nchunks, mode, [&](std::size_t c) {
        auto& g = w.partial_grads[c];
        g.assign(pcount, 0.0);
        double loss = 0.0;
        const std::size_t lo = c * B / nchunks;
        const std::size_t hi = (c + 1) * B / nchunks;
        FcnScratch fs;
        GruScratch gs;
        for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t row = batch[i];
            const int label = data.labels[row];
            if (fcn)
                loss += fcn_example_grad(params, fv, data.dense[row], label, g.data(), fs);
            else
                loss += gru_example_grad(params, gv, data.sequences[row], label, g.data(), gs);
        }
        w.partial_losses[c] = loss;
    });

    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    double total_loss = 0.0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        const auto& g = w.partial_grads[c];
        for (std::size_t i = 0; i < pcount; ++i)
            grad_out[i] += g[i];
        total_loss += w.partial_losses[c];
    }
    const double scale = 1.0 / static_cast<double>(B);
    for (double& g : grad_out)
        g *= scale;
    return total_loss * scale;
}

double finite_difference_check(const ArchitectureSpec& spec, const Dataset& data, double epsilon) {
    if (epsilon <= 0.0)
        throw ConfigError("finite_difference_check: epsilon must be positive");
    if (data.size() == 0)
        throw ShapeError("finite_difference_check: empty dataset");
    data.check_consistent();

    ModelParameters params = init_parameters(spec);
    std::vector<std::size_t> batch(data.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    std::vector<double> analytic(params.values.size());
    compute_gradients(params, data, batch, analytic, Exec::Serial);

    auto mean_loss = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double p = spec.kind == ArchKind::FCN ? fcn_forward(params, data.dense[i])
                                                        : gru_forward(params, data.sequences[i]);
            sum += bce_loss(p, data.labels[i]);
        }
        return sum / static_cast<double>(data.size());
    };

    double worst = 0.0;
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        const double saved = params.values[i];
        params.values[i] = saved + epsilon;
        const double up = mean_loss();
        params.values[i] = saved - epsilon;
        const double down = mean_loss();
        params.values[i] = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        // Central differences on an O(1) loss only resolve ~1e-11, so
        // gradients under the 1e-5 floor are compared absolutely; a
        // relative test there measures roundoff, not backprop.
        const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-5});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
    return worst;
}

}  // namespace fedtrial::nn
