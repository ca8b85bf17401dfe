#pragma once

#include <vector>

#include "sgsf/nn/tensor.hpp"
#include "sgsf/rng.hpp"

namespace sgsf::nn {

// Flat view of one parameter array and its gradient, in a stable order used
// by the optimizer and the checkpoint format alike.
struct Param {
    double* value = nullptr;
    double* grad = nullptr;
    size_t size = 0;
};

// 2-D convolution (square kernel), im2col + GEMM. backward() must follow the
// forward() whose input it differentiates; gradients accumulate until
// zero_grad().
class Conv2d {
public:
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad);

    // Fan-in-scaled uniform weights (variance 2/fan_in), zero biases.
    void init(Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);

    void zero_grad();
    std::vector<Param> params();

    int in_channels() const { return ic_; }
    int out_channels() const { return oc_; }
    int out_side(int in_side) const { return (in_side + 2 * pad_ - k_) / stride_ + 1; }

    std::vector<double> w, b, dw, db;

private:
    int ic_, oc_, k_, stride_, pad_;
    Tensor x_;                    // cached forward input
    std::vector<double> col_;     // im2col scratch
    std::vector<double> dcol_;
};

Tensor relu_fwd(const Tensor& x);
Tensor relu_bwd(const Tensor& y, const Tensor& dy);

Tensor sigmoid_fwd(const Tensor& x);
Tensor sigmoid_bwd(const Tensor& y, const Tensor& dy);

// Nearest-neighbour 2x upsample and its adjoint (2x2 block sum).
Tensor upsample2_fwd(const Tensor& x);
Tensor upsample2_bwd(const Tensor& dy);

Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& d, int c_front, Tensor& front, Tensor& back);

// dst += src (shape-checked)
void accumulate(Tensor& dst, const Tensor& src);

} // namespace sgsf::nn
