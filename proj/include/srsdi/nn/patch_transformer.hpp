// patch_transformer.hpp
//
// Masked patch transformer used as the learned denoiser. The complex grid is
// split into a 2-channel real image (real, imag); non-overlapping
// patch_h x patch_w patches are linearly embedded, fixed 2-D sine/cosine
// positions are added, and patches with no unmasked pixel are dropped. A CLS
// token is prepended, the encoder runs on the kept tokens, its output is
// projected to the decoder width, dropped slots are refilled with a learned
// mask token, positions are added again, and the decoder plus a linear head
// predict every patch of the clean grid.

#pragma once

#include "srsdi/denoiser.hpp"
#include "srsdi/nn/layers.hpp"

#include <memory>
#include <optional>

namespace srsdi::nn {

struct PatchTransformerConfig {
    std::size_t n_subcarriers = 64;
    std::size_t n_antennas = 8;
    std::size_t patch_h = 2;
    std::size_t patch_w = 8;
    std::size_t embed_enc = 64;
    std::size_t embed_dec = 64;
    std::size_t depth_enc = 2;
    std::size_t depth_dec = 2;
    std::size_t heads = 4;
    std::size_t mlp_ratio = 2;
    bool level_embedding = false;
    // Adds c_skip(level) * input to the output on observed pixels, where
    // c_skip is the scalar shrinkage for unit-power data at that level.
    bool input_skip = false;

    std::size_t grid_rows() const { return n_subcarriers / patch_h; }
    std::size_t grid_cols() const { return n_antennas / patch_w; }
    std::size_t n_patches() const { return grid_rows() * grid_cols(); }
    std::size_t patch_dim() const { return 2 * patch_h * patch_w; }

    void validate() const {
        if (patch_h == 0 || patch_w == 0) throw ParameterError("PatchTransformerConfig: zero patch size");
        if (n_subcarriers % patch_h != 0) throw ParameterError("PatchTransformerConfig: N not divisible by patch_h");
        if (n_antennas % patch_w != 0) throw ParameterError("PatchTransformerConfig: A not divisible by patch_w");
        if (heads == 0 || embed_enc % heads != 0 || embed_dec % heads != 0)
            throw ParameterError("PatchTransformerConfig: embedding widths must be divisible by heads");
        if (embed_enc % 4 != 0 || embed_dec % 4 != 0)
            throw ParameterError("PatchTransformerConfig: embedding widths must be divisible by 4");
        if (mlp_ratio == 0) throw ParameterError("PatchTransformerConfig: mlp_ratio must be >= 1");
    }
    friend bool operator==(const PatchTransformerConfig&, const PatchTransformerConfig&) = default;
};

class PatchTransformer {
public:
    struct Cache {
        std::vector<std::size_t> kept;
        Mat patches_kept;
        std::vector<Block::Cache> enc;
        LayerNorm::Cache enc_norm;
        Mat enc_out;
        std::vector<Block::Cache> dec;
        LayerNorm::Cache dec_norm;
        Mat dec_out;
    };

    explicit PatchTransformer(PatchTransformerConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        const auto ee = static_cast<Eigen::Index>(cfg_.embed_enc);
        const auto ed = static_cast<Eigen::Index>(cfg_.embed_dec);
        const auto pd = static_cast<Eigen::Index>(cfg_.patch_dim());
        const auto heads = static_cast<Eigen::Index>(cfg_.heads);
        patch_embed_ = Linear::create(ps_, "patch_embed", pd, ee);
        cls_ = ps_.add("cls_token", ee, 1);
        for (std::size_t l = 0; l < cfg_.depth_enc; ++l)
            enc_.push_back(Block::create(ps_, "enc." + std::to_string(l), ee, heads,
                                         ee * static_cast<Eigen::Index>(cfg_.mlp_ratio)));
        enc_norm_ = LayerNorm::create(ps_, "enc_norm", ee);
        dec_embed_ = Linear::create(ps_, "dec_embed", ee, ed);
        mask_token_ = ps_.add("mask_token", ed, 1);
        for (std::size_t l = 0; l < cfg_.depth_dec; ++l)
            dec_.push_back(Block::create(ps_, "dec." + std::to_string(l), ed, heads,
                                         ed * static_cast<Eigen::Index>(cfg_.mlp_ratio)));
        dec_norm_ = LayerNorm::create(ps_, "dec_norm", ed);
        head_ = Linear::create(ps_, "head", ed, pd);

        const auto rows = static_cast<Eigen::Index>(cfg_.grid_rows());
        const auto cols = static_cast<Eigen::Index>(cfg_.grid_cols());
        pos_enc_ = sincos_2d(rows, cols, ee);
        pos_dec_ = sincos_2d(rows, cols, ed);
    }

    void init(std::uint64_t seed) {
        Rng rng = make_rng(derive_seed(seed, "init"));
        patch_embed_.init(ps_, rng);
        truncated_normal(ps_[cls_], 0.02, rng);
        for (const auto& b : enc_) b.init(ps_, rng);
        enc_norm_.init(ps_);
        dec_embed_.init(ps_, rng);
        truncated_normal(ps_[mask_token_], 0.02, rng);
        for (const auto& b : dec_) b.init(ps_, rng);
        dec_norm_.init(ps_);
        head_.init(ps_, rng);
    }

    const PatchTransformerConfig& config() const { return cfg_; }
    ParamStore& params() { return ps_; }
    const ParamStore& params() const { return ps_; }

    // Patch matrix (n_patches x patch_dim) of mask .* grid.
    Mat to_patches(const ComplexGrid& grid, const Mask& mask) const {
        const std::size_t ph = cfg_.patch_h, pw = cfg_.patch_w, cols = cfg_.grid_cols();
        Mat p(static_cast<Eigen::Index>(cfg_.n_patches()), static_cast<Eigen::Index>(cfg_.patch_dim()));
        for (std::size_t t = 0; t < cfg_.n_patches(); ++t) {
            const std::size_t r0 = (t / cols) * ph, c0 = (t % cols) * pw;
            for (std::size_t u = 0; u < ph; ++u)
                for (std::size_t v = 0; v < pw; ++v) {
                    const bool on = mask(r0 + u, c0 + v);
                    const cplx z = on ? grid(r0 + u, c0 + v) : cplx{};
                    const auto j = static_cast<Eigen::Index>(u * pw + v);
                    p(static_cast<Eigen::Index>(t), j) = z.real();
                    p(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(ph * pw) + j) = z.imag();
                }
        }
        return p;
    }

    ComplexGrid from_patches(const Mat& p) const {
        const std::size_t ph = cfg_.patch_h, pw = cfg_.patch_w, cols = cfg_.grid_cols();
        ComplexGrid g(cfg_.n_subcarriers, cfg_.n_antennas);
        for (std::size_t t = 0; t < cfg_.n_patches(); ++t) {
            const std::size_t r0 = (t / cols) * ph, c0 = (t % cols) * pw;
            for (std::size_t u = 0; u < ph; ++u)
                for (std::size_t v = 0; v < pw; ++v) {
                    const auto j = static_cast<Eigen::Index>(u * pw + v);
                    g(r0 + u, c0 + v) = {p(static_cast<Eigen::Index>(t), j),
                                         p(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(ph * pw) + j)};
                }
        }
        return g;
    }

    // Patches with at least one unmasked pixel, in token order.
    std::vector<std::size_t> kept_patches(const Mask& mask) const {
        const std::size_t ph = cfg_.patch_h, pw = cfg_.patch_w, cols = cfg_.grid_cols();
        std::vector<std::size_t> kept;
        for (std::size_t t = 0; t < cfg_.n_patches(); ++t) {
            const std::size_t r0 = (t / cols) * ph, c0 = (t % cols) * pw;
            bool any = false;
            for (std::size_t u = 0; u < ph && !any; ++u)
                for (std::size_t v = 0; v < pw && !any; ++v) any = mask(r0 + u, c0 + v);
            if (any) kept.push_back(t);
        }
        return kept;
    }

    static double level_value(const NoiseLevel& level) {
        if (const auto* ve = std::get_if<VeLevel>(&level)) return std::log(std::max(ve->sigma, 1e-12));
        const double ab = std::get<VpLevel>(level).alphabar;
        return 0.5 * std::log(std::max((1.0 - ab) / ab, 1e-24));
    }

    // Scalar LMMSE gain for unit-power complex data seen at `level`.
    static double skip_gain(const NoiseLevel& level) {
        if (const auto* ve = std::get_if<VeLevel>(&level)) return 1.0 / (1.0 + 2.0 * ve->sigma * ve->sigma);
        return std::sqrt(std::get<VpLevel>(level).alphabar);
    }

    // Returns the predicted patch matrix (n_patches x patch_dim).
    Mat forward(const ComplexGrid& grid, const Mask& mask, const NoiseLevel& level, Cache* c) const {
        if (grid.n_subcarriers() != cfg_.n_subcarriers || grid.n_antennas() != cfg_.n_antennas)
            throw ShapeError("PatchTransformer: grid shape does not match the model configuration");
        require_same_shape(grid.shape(), mask.shape(), "PatchTransformer");
        const auto ee = static_cast<Eigen::Index>(cfg_.embed_enc);
        const auto ed = static_cast<Eigen::Index>(cfg_.embed_dec);

        const Mat all = to_patches(grid, mask);
        std::vector<std::size_t> kept = kept_patches(mask);
        const auto nk = static_cast<Eigen::Index>(kept.size());
        Mat pk(nk, all.cols());
        for (Eigen::Index j = 0; j < nk; ++j) pk.row(j) = all.row(static_cast<Eigen::Index>(kept[static_cast<std::size_t>(j)]));

        Mat x(nk + 1, ee);
        x.row(0) = ps_[cls_].col(0).transpose();
        if (nk > 0) {
            x.bottomRows(nk) = patch_embed_.forward(ps_, pk);
            for (Eigen::Index j = 0; j < nk; ++j)
                x.row(j + 1) += pos_enc_.row(static_cast<Eigen::Index>(kept[static_cast<std::size_t>(j)]));
        }
        if (cfg_.level_embedding) x.rowwise() += sincos_scalar(level_value(level), ee);

        if (c) c->enc.resize(enc_.size());
        for (std::size_t l = 0; l < enc_.size(); ++l) x = enc_[l].forward(ps_, x, c ? &c->enc[l] : nullptr);
        Mat enc_out = enc_norm_.forward(ps_, x, c ? &c->enc_norm : nullptr);
        Mat d = dec_embed_.forward(ps_, enc_out);

        const auto np = static_cast<Eigen::Index>(cfg_.n_patches());
        Mat y(np + 1, ed);
        y.row(0) = d.row(0);
        for (Eigen::Index t = 0; t < np; ++t) y.row(t + 1) = ps_[mask_token_].col(0).transpose();
        for (Eigen::Index j = 0; j < nk; ++j) y.row(static_cast<Eigen::Index>(kept[static_cast<std::size_t>(j)]) + 1) = d.row(j + 1);
        y.bottomRows(np) += pos_dec_;

        if (c) c->dec.resize(dec_.size());
        for (std::size_t l = 0; l < dec_.size(); ++l) y = dec_[l].forward(ps_, y, c ? &c->dec[l] : nullptr);
        Mat dec_out = dec_norm_.forward(ps_, y, c ? &c->dec_norm : nullptr);
        Mat out = head_.forward(ps_, dec_out.bottomRows(np));
        if (cfg_.input_skip) out += skip_gain(level) * all;

        if (c) {
            c->kept = std::move(kept);
            c->patches_kept = std::move(pk);
            c->enc_out = std::move(enc_out);
            c->dec_out = std::move(dec_out);
        }
        return out;
    }

    ComplexGrid predict(const ComplexGrid& grid, const Mask& mask, const NoiseLevel& level) const {
        ComplexGrid out = from_patches(forward(grid, mask, level, nullptr));
        out.require_finite("PatchTransformer");
        return out;
    }

    // Accumulates parameter gradients given d(loss)/d(output patches).
    void backward(const Cache& c, const Mat& dout, Grads& g) const {
        const auto np = static_cast<Eigen::Index>(cfg_.n_patches());
        const auto nk = static_cast<Eigen::Index>(c.kept.size());
        Mat ddec_out = Mat::Zero(np + 1, static_cast<Eigen::Index>(cfg_.embed_dec));
        ddec_out.bottomRows(np) = head_.backward(ps_, g, c.dec_out.bottomRows(np), dout);
        Mat dy = dec_norm_.backward(ps_, g, c.dec_norm, ddec_out);
        for (std::size_t l = dec_.size(); l-- > 0;) dy = dec_[l].backward(ps_, g, c.dec[l], dy);

        Mat dd(nk + 1, dy.cols());
        dd.row(0) = dy.row(0);
        std::vector<char> is_kept(static_cast<std::size_t>(np), 0);
        for (Eigen::Index j = 0; j < nk; ++j) {
            const auto t = static_cast<Eigen::Index>(c.kept[static_cast<std::size_t>(j)]);
            dd.row(j + 1) = dy.row(t + 1);
            is_kept[static_cast<std::size_t>(t)] = 1;
        }
        for (Eigen::Index t = 0; t < np; ++t)
            if (!is_kept[static_cast<std::size_t>(t)]) g[mask_token_].col(0) += dy.row(t + 1).transpose();

        Mat dx = enc_norm_.backward(ps_, g, c.enc_norm, dec_embed_.backward(ps_, g, c.enc_out, dd));
        for (std::size_t l = enc_.size(); l-- > 0;) dx = enc_[l].backward(ps_, g, c.enc[l], dx);
        g[cls_].col(0) += dx.row(0).transpose();
        if (nk > 0) patch_embed_.backward(ps_, g, c.patches_kept, dx.bottomRows(nk));
    }

private:
    PatchTransformerConfig cfg_;
    ParamStore ps_;
    Linear patch_embed_;
    std::size_t cls_ = 0;
    std::vector<Block> enc_;
    LayerNorm enc_norm_;
    Linear dec_embed_;
    std::size_t mask_token_ = 0;
    std::vector<Block> dec_;
    LayerNorm dec_norm_;
    Linear head_;
    Mat pos_enc_, pos_dec_;
};

// f_theta backed by a trained transformer. Read-only after construction.
class PatchTransformerDenoiser final : public Denoiser {
public:
    explicit PatchTransformerDenoiser(std::shared_ptr<const PatchTransformer> model) : model_(std::move(model)) {
        if (!model_->params().all_finite()) throw NumericError("PatchTransformerDenoiser: non-finite weights");
    }
    ComplexGrid denoise(const DenoiserInput& in) const override { return model_->predict(in.grid, in.mask, in.level); }
    const PatchTransformer& model() const { return *model_; }

private:
    std::shared_ptr<const PatchTransformer> model_;
};

}  // namespace srsdi::nn
