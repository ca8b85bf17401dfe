#pragma once

#include <vector>

#include "sgsf/nn/layers.hpp"
#include "sgsf/nn/tensor.hpp"
#include "sgsf/rng.hpp"

namespace sgsf {

// Architecture knobs shared by both networks. Level i in 1..depth has
// base_channels * 2^(i-1) channels at spatial side N / 2^i, so the deepest
// level is (N/2^depth, base * 2^(depth-1)) and every pyramid follows the
// same geometric progression.
struct NetConfig {
    int in_channels = 3;
    int base_channels = 16;
    int depth = 4;

    int channels_at(int level) const { return base_channels << (level - 1); }
};

// Reconstruction autoencoder. Its decoder features are the guidance pyramid
// consumed by the segmentation network; its deepest encoder features feed
// the similarity embeddings.
class SelfNet {
public:
    explicit SelfNet(const NetConfig& cfg);

    void init(Rng& rng);

    struct Forward {
        nn::Tensor recon;             // sigmoid-bounded, input-sized
        std::vector<nn::Tensor> enc;  // levels 1..depth
        std::vector<nn::Tensor> dec;  // guidance pyramid, levels 1..depth
    };

    const Forward& forward(const nn::Tensor& x);

    // Encoder-only pass for similarity embeddings. Overwrites layer caches,
    // so never interleave with a pending backward.
    nn::Tensor encode(const nn::Tensor& x);

    // d_recon: gradient at the reconstruction; d_dec: per-level gradients
    // injected into the guidance pyramid (empty tensors for none).
    void backward(const nn::Tensor& d_recon, const std::vector<nn::Tensor>& d_dec);

    void zero_grad();
    std::vector<nn::Param> params();
    const NetConfig& config() const { return cfg_; }

private:
    NetConfig cfg_;
    std::vector<nn::Conv2d> enc_;
    nn::Conv2d bott_;
    std::vector<nn::Conv2d> dec_; // dec_[i-1] maps level i+1 -> level i
    nn::Conv2d recon_;
    Forward fwd_;
};

// Segmentation network. Encoder features fuse with the guidance pyramid by
// channel concatenation; a 3x3 convolution restores the channel count and
// the result rejoins the decoder through skip connections.
class SegNet {
public:
    explicit SegNet(const NetConfig& cfg);

    void init(Rng& rng);

    struct Forward {
        nn::Tensor out;                 // (n,1,N,N) per-pixel anomaly probability
        std::vector<nn::Tensor> enc;    // levels 1..depth
        std::vector<nn::Tensor> dec;    // levels 1..depth
        std::vector<nn::Tensor> fused;  // post-fusion features, levels 1..depth
    };

    const Forward& forward(const nn::Tensor& x, const std::vector<nn::Tensor>& guidance);

    // Returns the gradients flowing back into the guidance pyramid.
    std::vector<nn::Tensor> backward(const nn::Tensor& d_out);

    void zero_grad();
    std::vector<nn::Param> params();
    const NetConfig& config() const { return cfg_; }

private:
    NetConfig cfg_;
    std::vector<nn::Conv2d> enc_;
    std::vector<nn::Conv2d> fuse_;
    nn::Conv2d bott_;
    std::vector<nn::Conv2d> dec_;
    nn::Conv2d head1_;
    nn::Conv2d head2_;
    Forward fwd_;
    nn::Tensor h1_;
};

// Throws unless x is square, matches in_channels, and its side divides
// evenly through `depth` halvings.
void check_net_input(const NetConfig& cfg, const nn::Tensor& x);

} // namespace sgsf
