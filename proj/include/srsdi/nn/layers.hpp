// layers.hpp
//
// Minimal transformer building blocks with explicit backward passes. Tokens
// are rows: an activation is a (tokens x width) matrix. Weights follow the
// (out x in) convention, so a linear layer computes X W^T + b.

#pragma once

#include "srsdi/core.hpp"
#include "srsdi/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace srsdi::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Tensor {
    std::string name;
    Mat value;
};

// Flat, ordered list of named parameter tensors. Layers refer to their
// tensors by index so that gradients and optimizer state can mirror the
// same layout.
class ParamStore {
public:
    std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
        tensors_.push_back({std::move(name), Mat::Zero(rows, cols)});
        return tensors_.size() - 1;
    }

    Mat& operator[](std::size_t i) { return tensors_[i].value; }
    const Mat& operator[](std::size_t i) const { return tensors_[i].value; }
    std::size_t size() const { return tensors_.size(); }
    const std::vector<Tensor>& tensors() const { return tensors_; }
    std::vector<Tensor>& tensors() { return tensors_; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
        return n;
    }

    std::vector<Mat> zeros_like() const {
        std::vector<Mat> g;
        g.reserve(tensors_.size());
        for (const auto& t : tensors_) g.push_back(Mat::Zero(t.value.rows(), t.value.cols()));
        return g;
    }

    bool all_finite() const {
        for (const auto& t : tensors_)
            if (!t.value.allFinite()) return false;
        return true;
    }

private:
    std::vector<Tensor> tensors_;
};

using Grads = std::vector<Mat>;

inline void truncated_normal(Mat& m, double std, Rng& rng) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        double v;
        do {
            v = std_normal(rng);
        } while (std::abs(v) > 2.0);
        m.data()[i] = std * v;
    }
}

// ---------------------------------------------------------------------------

struct Linear {
    std::size_t w = 0, b = 0;

    static Linear create(ParamStore& ps, const std::string& name, Eigen::Index in, Eigen::Index out) {
        return {ps.add(name + ".weight", out, in), ps.add(name + ".bias", out, 1)};
    }
    void init(ParamStore& ps, Rng& rng) const {
        truncated_normal(ps[w], 0.02, rng);
        ps[b].setZero();
    }
    Mat forward(const ParamStore& ps, const Mat& x) const {
        Mat y = x * ps[w].transpose();
        y.rowwise() += ps[b].col(0).transpose();
        return y;
    }
    Mat backward(const ParamStore& ps, Grads& g, const Mat& x, const Mat& dy) const {
        g[w].noalias() += dy.transpose() * x;
        g[b].col(0) += dy.colwise().sum().transpose();
        return dy * ps[w];
    }
};

struct LayerNorm {
    std::size_t gamma = 0, beta = 0;
    static constexpr double eps = 1e-5;

    struct Cache {
        Mat xhat;
        Vec inv_std;
    };

    static LayerNorm create(ParamStore& ps, const std::string& name, Eigen::Index width) {
        return {ps.add(name + ".gamma", width, 1), ps.add(name + ".beta", width, 1)};
    }
    void init(ParamStore& ps) const {
        ps[gamma].setOnes();
        ps[beta].setZero();
    }
    Mat forward(const ParamStore& ps, const Mat& x, Cache* c) const {
        const Eigen::Index n = x.cols();
        Vec mean = x.rowwise().mean();
        Mat xc = x.colwise() - mean;
        Vec inv_std = ((xc.array().square().rowwise().sum() / static_cast<double>(n)) + eps).rsqrt();
        Mat xhat = xc.array().colwise() * inv_std.array();
        Mat y = xhat.array().rowwise() * ps[gamma].col(0).transpose().array();
        y.rowwise() += ps[beta].col(0).transpose();
        if (c) {
            c->xhat = std::move(xhat);
            c->inv_std = std::move(inv_std);
        }
        return y;
    }
    Mat backward(const ParamStore& ps, Grads& g, const Cache& c, const Mat& dy) const {
        const auto n = static_cast<double>(dy.cols());
        g[gamma].col(0) += (dy.array() * c.xhat.array()).colwise().sum().transpose().matrix();
        g[beta].col(0) += dy.colwise().sum().transpose();
        Mat dxhat = dy.array().rowwise() * ps[gamma].col(0).transpose().array();
        Vec m1 = dxhat.rowwise().sum() / n;
        Vec m2 = (dxhat.array() * c.xhat.array()).rowwise().sum().matrix() / n;
        Mat dx = dxhat;
        dx.colwise() -= m1;
        dx.array() -= c.xhat.array().colwise() * m2.array();
        return dx.array().colwise() * c.inv_std.array();
    }
};

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }
inline double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

struct Mlp {
    Linear fc1, fc2;

    struct Cache {
        Mat x, pre, act;
    };

    static Mlp create(ParamStore& ps, const std::string& name, Eigen::Index width, Eigen::Index hidden) {
        return {Linear::create(ps, name + ".fc1", width, hidden), Linear::create(ps, name + ".fc2", hidden, width)};
    }
    void init(ParamStore& ps, Rng& rng) const {
        fc1.init(ps, rng);
        fc2.init(ps, rng);
    }
    Mat forward(const ParamStore& ps, const Mat& x, Cache* c) const {
        Mat pre = fc1.forward(ps, x);
        Mat act = pre.unaryExpr([](double v) { return gelu(v); });
        Mat y = fc2.forward(ps, act);
        if (c) {
            c->x = x;
            c->pre = std::move(pre);
            c->act = std::move(act);
        }
        return y;
    }
    Mat backward(const ParamStore& ps, Grads& g, const Cache& c, const Mat& dy) const {
        Mat dact = fc2.backward(ps, g, c.act, dy);
        Mat dpre = dact.array() * c.pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
        return fc1.backward(ps, g, c.x, dpre);
    }
};

struct Attention {
    Linear qkv, proj;
    Eigen::Index heads = 1;

    struct Cache {
        Mat x, qkv, concat;
        std::vector<Mat> probs;
    };

    static Attention create(ParamStore& ps, const std::string& name, Eigen::Index width, Eigen::Index heads) {
        if (heads < 1 || width % heads != 0) throw ParameterError("Attention: width must be divisible by heads");
        return {Linear::create(ps, name + ".qkv", width, 3 * width), Linear::create(ps, name + ".proj", width, width),
                heads};
    }
    void init(ParamStore& ps, Rng& rng) const {
        qkv.init(ps, rng);
        proj.init(ps, rng);
    }

    Mat forward(const ParamStore& ps, const Mat& x, Cache* c) const {
        const Eigen::Index t = x.rows();
        const Eigen::Index e = x.cols();
        const Eigen::Index d = e / heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));
        Mat qkv_out = qkv.forward(ps, x);
        Mat concat(t, e);
        if (c) c->probs.assign(static_cast<std::size_t>(heads), Mat());
        for (Eigen::Index h = 0; h < heads; ++h) {
            Mat s = (qkv_out.middleCols(h * d, d) * qkv_out.middleCols(e + h * d, d).transpose()) * scale;
            Vec mx = s.rowwise().maxCoeff();
            s.colwise() -= mx;
            s = s.array().exp();
            Vec sum = s.rowwise().sum();
            s.array().colwise() /= sum.array();
            concat.middleCols(h * d, d).noalias() = s * qkv_out.middleCols(2 * e + h * d, d);
            if (c) c->probs[static_cast<std::size_t>(h)] = std::move(s);
        }
        Mat y = proj.forward(ps, concat);
        if (c) {
            c->x = x;
            c->qkv = std::move(qkv_out);
            c->concat = std::move(concat);
        }
        return y;
    }

    Mat backward(const ParamStore& ps, Grads& g, const Cache& c, const Mat& dy) const {
        const Eigen::Index t = c.x.rows();
        const Eigen::Index e = c.x.cols();
        const Eigen::Index d = e / heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));
        Mat dconcat = proj.backward(ps, g, c.concat, dy);
        Mat dqkv(t, 3 * e);
        for (Eigen::Index h = 0; h < heads; ++h) {
            const Mat& p = c.probs[static_cast<std::size_t>(h)];
            const auto q = c.qkv.middleCols(h * d, d);
            const auto k = c.qkv.middleCols(e + h * d, d);
            const auto v = c.qkv.middleCols(2 * e + h * d, d);
            const auto dout = dconcat.middleCols(h * d, d);
            Mat dp = dout * v.transpose();
            dqkv.middleCols(2 * e + h * d, d).noalias() = p.transpose() * dout;
            Vec row = (dp.array() * p.array()).rowwise().sum();
            Mat ds = p.array() * (dp.colwise() - row).array();
            ds *= scale;
            dqkv.middleCols(h * d, d).noalias() = ds * k;
            dqkv.middleCols(e + h * d, d).noalias() = ds.transpose() * q;
        }
        return qkv.backward(ps, g, c.x, dqkv);
    }
};

// Pre-norm transformer block: x + attn(ln1(x)), then + mlp(ln2(.)).
struct Block {
    LayerNorm ln1, ln2;
    Attention attn;
    Mlp mlp;

    struct Cache {
        LayerNorm::Cache ln1, ln2;
        Attention::Cache attn;
        Mlp::Cache mlp;
    };

    static Block create(ParamStore& ps, const std::string& name, Eigen::Index width, Eigen::Index heads,
                        Eigen::Index hidden) {
        Block b;
        b.ln1 = LayerNorm::create(ps, name + ".ln1", width);
        b.attn = Attention::create(ps, name + ".attn", width, heads);
        b.ln2 = LayerNorm::create(ps, name + ".ln2", width);
        b.mlp = Mlp::create(ps, name + ".mlp", width, hidden);
        return b;
    }
    void init(ParamStore& ps, Rng& rng) const {
        ln1.init(ps);
        attn.init(ps, rng);
        ln2.init(ps);
        mlp.init(ps, rng);
    }
    Mat forward(const ParamStore& ps, const Mat& x, Cache* c) const {
        Mat h = x + attn.forward(ps, ln1.forward(ps, x, c ? &c->ln1 : nullptr), c ? &c->attn : nullptr);
        return h + mlp.forward(ps, ln2.forward(ps, h, c ? &c->ln2 : nullptr), c ? &c->mlp : nullptr);
    }
    Mat backward(const ParamStore& ps, Grads& g, const Cache& c, const Mat& dy) const {
        Mat dh = dy + ln2.backward(ps, g, c.ln2, mlp.backward(ps, g, c.mlp, dy));
        return dh + ln1.backward(ps, g, c.ln1, attn.backward(ps, g, c.attn, dh));
    }
};

// Fixed 2-D sine/cosine table, one row per (row, col) grid position in
// row-major order; half the width encodes the row, half the column.
inline Mat sincos_2d(Eigen::Index rows, Eigen::Index cols, Eigen::Index width) {
    if (width % 4 != 0) throw ParameterError("sincos_2d: width must be divisible by 4");
    const Eigen::Index quarter = width / 4;
    Mat table(rows * cols, width);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Eigen::Index t = r * cols + c;
            for (Eigen::Index i = 0; i < quarter; ++i) {
                const double omega = 1.0 / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(quarter));
                table(t, i) = std::sin(static_cast<double>(r) * omega);
                table(t, quarter + i) = std::cos(static_cast<double>(r) * omega);
                table(t, 2 * quarter + i) = std::sin(static_cast<double>(c) * omega);
                table(t, 3 * quarter + i) = std::cos(static_cast<double>(c) * omega);
            }
        }
    return table;
}

// Sinusoidal embedding of a scalar (used for the optional noise-level input).
inline Eigen::RowVectorXd sincos_scalar(double v, Eigen::Index width) {
    Eigen::RowVectorXd out(width);
    const Eigen::Index half = width / 2;
    for (Eigen::Index i = 0; i < half; ++i) {
        const double omega = std::exp(-std::log(1000.0) * static_cast<double>(i) / static_cast<double>(half));
        out(i) = std::sin(v * omega);
        out(half + i) = std::cos(v * omega);
    }
    if (width % 2) out(width - 1) = 0.0;
    return out;
}

}  // namespace srsdi::nn
