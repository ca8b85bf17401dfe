#include "sgsf/nets.hpp"

#include "sgsf/error.hpp"

namespace sgsf {

using nn::Tensor;

void check_net_input(const NetConfig& cfg, const Tensor& x) {
    if (x.h != x.w) throw ValidationError("net input must be square");
    if (x.c != cfg.in_channels) throw ValidationError("net input channel count mismatch");
    if (x.h % (1 << cfg.depth) != 0)
        throw ValidationError("net input side must be divisible by 2^depth (" +
                              std::to_string(1 << cfg.depth) + ")");
}

namespace {

std::vector<nn::Conv2d> make_encoder(const NetConfig& cfg) {
    std::vector<nn::Conv2d> enc;
    enc.reserve(cfg.depth);
    for (int i = 1; i <= cfg.depth; ++i) {
        const int in = i == 1 ? cfg.in_channels : cfg.channels_at(i - 1);
        enc.emplace_back(in, cfg.channels_at(i), 3, 2, 1);
    }
    return enc;
}

} // namespace

SelfNet::SelfNet(const NetConfig& cfg)
    : cfg_(cfg), enc_(make_encoder(cfg)),
      bott_(cfg.channels_at(cfg.depth), cfg.channels_at(cfg.depth), 3, 1, 1),
      recon_(cfg.channels_at(1), cfg.in_channels, 3, 1, 1) {
    dec_.reserve(cfg.depth - 1);
    for (int i = 1; i < cfg.depth; ++i)
        dec_.emplace_back(cfg.channels_at(i + 1), cfg.channels_at(i), 3, 1, 1);
}

void SelfNet::init(Rng& rng) {
    for (auto& l : enc_) l.init(rng);
    bott_.init(rng);
    for (auto& l : dec_) l.init(rng);
    recon_.init(rng);
}

const SelfNet::Forward& SelfNet::forward(const Tensor& x) {
    check_net_input(cfg_, x);
    fwd_.enc.assign(cfg_.depth, Tensor{});
    fwd_.dec.assign(cfg_.depth, Tensor{});

    Tensor cur = x;
    for (int i = 1; i <= cfg_.depth; ++i) {
        cur = nn::relu_fwd(enc_[i - 1].forward(cur));
        fwd_.enc[i - 1] = cur;
    }

    fwd_.dec[cfg_.depth - 1] = nn::relu_fwd(bott_.forward(fwd_.enc[cfg_.depth - 1]));
    for (int i = cfg_.depth - 1; i >= 1; --i)
        fwd_.dec[i - 1] = nn::relu_fwd(dec_[i - 1].forward(nn::upsample2_fwd(fwd_.dec[i])));

    fwd_.recon = nn::sigmoid_fwd(recon_.forward(nn::upsample2_fwd(fwd_.dec[0])));
    return fwd_;
}

nn::Tensor SelfNet::encode(const Tensor& x) {
    check_net_input(cfg_, x);
    Tensor cur = x;
    for (int i = 1; i <= cfg_.depth; ++i) cur = nn::relu_fwd(enc_[i - 1].forward(cur));
    return cur;
}

void SelfNet::backward(const Tensor& d_recon, const std::vector<Tensor>& d_dec) {
    Tensor d = nn::sigmoid_bwd(fwd_.recon, d_recon);
    d = nn::upsample2_bwd(recon_.backward(d));

    for (int i = 1; i < cfg_.depth; ++i) {
        if (static_cast<int>(d_dec.size()) >= i) nn::accumulate(d, d_dec[i - 1]);
        d = nn::relu_bwd(fwd_.dec[i - 1], d);
        d = nn::upsample2_bwd(dec_[i - 1].backward(d));
    }

    if (static_cast<int>(d_dec.size()) >= cfg_.depth) nn::accumulate(d, d_dec[cfg_.depth - 1]);
    d = nn::relu_bwd(fwd_.dec[cfg_.depth - 1], d);
    d = bott_.backward(d);

    for (int i = cfg_.depth; i >= 1; --i) {
        d = nn::relu_bwd(fwd_.enc[i - 1], d);
        d = enc_[i - 1].backward(d);
    }
}

void SelfNet::zero_grad() {
    for (auto& l : enc_) l.zero_grad();
    bott_.zero_grad();
    for (auto& l : dec_) l.zero_grad();
    recon_.zero_grad();
}

std::vector<nn::Param> SelfNet::params() {
    std::vector<nn::Param> out;
    auto add = [&out](nn::Conv2d& l) {
        for (auto& p : l.params()) out.push_back(p);
    };
    for (auto& l : enc_) add(l);
    add(bott_);
    for (auto& l : dec_) add(l);
    add(recon_);
    return out;
}

SegNet::SegNet(const NetConfig& cfg)
    : cfg_(cfg), enc_(make_encoder(cfg)),
      bott_(cfg.channels_at(cfg.depth), cfg.channels_at(cfg.depth), 3, 1, 1),
      head1_(cfg.channels_at(1), cfg.channels_at(1), 3, 1, 1),
      head2_(cfg.channels_at(1), 1, 3, 1, 1) {
    fuse_.reserve(cfg.depth);
    for (int i = 1; i <= cfg.depth; ++i)
        fuse_.emplace_back(2 * cfg.channels_at(i), cfg.channels_at(i), 3, 1, 1);
    dec_.reserve(cfg.depth - 1);
    for (int i = 1; i < cfg.depth; ++i)
        dec_.emplace_back(cfg.channels_at(i + 1) + cfg.channels_at(i), cfg.channels_at(i), 3, 1, 1);
}

void SegNet::init(Rng& rng) {
    for (auto& l : enc_) l.init(rng);
    for (auto& l : fuse_) l.init(rng);
    bott_.init(rng);
    for (auto& l : dec_) l.init(rng);
    head1_.init(rng);
    head2_.init(rng);
}

const SegNet::Forward& SegNet::forward(const Tensor& x, const std::vector<Tensor>& guidance) {
    check_net_input(cfg_, x);
    if (static_cast<int>(guidance.size()) != cfg_.depth)
        throw ValidationError("guidance pyramid must have one level per stage");
    fwd_.enc.assign(cfg_.depth, Tensor{});
    fwd_.dec.assign(cfg_.depth, Tensor{});
    fwd_.fused.assign(cfg_.depth, Tensor{});

    Tensor cur = x;
    for (int i = 1; i <= cfg_.depth; ++i) {
        cur = nn::relu_fwd(enc_[i - 1].forward(cur));
        fwd_.enc[i - 1] = cur;
    }

    for (int i = 1; i <= cfg_.depth; ++i) {
        const Tensor& g = guidance[i - 1];
        const Tensor& ae = fwd_.enc[i - 1];
        if (!g.same_shape(ae))
            throw ValidationError("guidance level " + std::to_string(i) +
                                  " is not shape-compatible with the encoder");
        fwd_.fused[i - 1] = nn::relu_fwd(fuse_[i - 1].forward(nn::concat_channels(g, ae)));
    }

    fwd_.dec[cfg_.depth - 1] = nn::relu_fwd(bott_.forward(fwd_.fused[cfg_.depth - 1]));
    for (int i = cfg_.depth - 1; i >= 1; --i) {
        const Tensor up = nn::upsample2_fwd(fwd_.dec[i]);
        fwd_.dec[i - 1] =
            nn::relu_fwd(dec_[i - 1].forward(nn::concat_channels(up, fwd_.fused[i - 1])));
    }

    h1_ = nn::relu_fwd(head1_.forward(nn::upsample2_fwd(fwd_.dec[0])));
    fwd_.out = nn::sigmoid_fwd(head2_.forward(h1_));
    return fwd_;
}

std::vector<Tensor> SegNet::backward(const Tensor& d_out) {
    Tensor d = nn::sigmoid_bwd(fwd_.out, d_out);
    d = head2_.backward(d);
    d = nn::relu_bwd(h1_, d);
    d = nn::upsample2_bwd(head1_.backward(d));

    // Decoder: peel gradients level by level, collecting those of the
    // post-fusion features.
    std::vector<Tensor> d_fused(cfg_.depth);
    for (int i = 1; i < cfg_.depth; ++i) {
        d = nn::relu_bwd(fwd_.dec[i - 1], d);
        const Tensor dcat = dec_[i - 1].backward(d);
        Tensor dup, dfu;
        nn::split_channels(dcat, cfg_.channels_at(i + 1), dup, dfu);
        d_fused[i - 1] = std::move(dfu);
        d = nn::upsample2_bwd(dup);
    }
    d = nn::relu_bwd(fwd_.dec[cfg_.depth - 1], d);
    d_fused[cfg_.depth - 1] = bott_.backward(d);

    // Fusion and encoder, deepest first; `carry` is the gradient the next
    // shallower encoder output receives from the stage above.
    std::vector<Tensor> d_guidance(cfg_.depth);
    Tensor carry;
    for (int i = cfg_.depth; i >= 1; --i) {
        Tensor dfp = nn::relu_bwd(fwd_.fused[i - 1], d_fused[i - 1]);
        const Tensor dcat = fuse_[i - 1].backward(dfp);
        Tensor dg, dae;
        nn::split_channels(dcat, cfg_.channels_at(i), dg, dae);
        d_guidance[i - 1] = std::move(dg);
        if (!carry.empty()) nn::accumulate(dae, carry);
        dae = nn::relu_bwd(fwd_.enc[i - 1], dae);
        carry = enc_[i - 1].backward(dae);
    }
    return d_guidance;
}

void SegNet::zero_grad() {
    for (auto& l : enc_) l.zero_grad();
    for (auto& l : fuse_) l.zero_grad();
    bott_.zero_grad();
    for (auto& l : dec_) l.zero_grad();
    head1_.zero_grad();
    head2_.zero_grad();
}

std::vector<nn::Param> SegNet::params() {
    std::vector<nn::Param> out;
    auto add = [&out](nn::Conv2d& l) {
        for (auto& p : l.params()) out.push_back(p);
    };
    for (auto& l : enc_) add(l);
    for (auto& l : fuse_) add(l);
    add(bott_);
    for (auto& l : dec_) add(l);
    add(head1_);
    add(head2_);
    return out;
}

} // namespace sgsf
