#pragma once

#include "sgsf/grid.hpp"
#include "sgsf/image.hpp"
#include "sgsf/nn/tensor.hpp"

namespace sgsf::losses {

struct LossValue {
    double total = 0.0;
    double l2 = 0.0;
    double ssim = 0.0;
    double focal = 0.0;
};

// Mean squared error over every element.
double l2_loss(const nn::Tensor& target, const nn::Tensor& recon);
double l2_loss_grad(const nn::Tensor& target, const nn::Tensor& recon, nn::Tensor& d_recon);

// Mean of (1 - SSIM) with a k x k Gaussian window (sigma 1.5), stabilizers
// (0.01)^2 and (0.03)^2 at unit dynamic range, replicate borders.
double ssim_loss(const nn::Tensor& target, const nn::Tensor& recon, int window);
double ssim_loss_grad(const nn::Tensor& target, const nn::Tensor& recon, int window,
                      nn::Tensor& d_recon);

double self_loss(const nn::Tensor& target, const nn::Tensor& recon, int window);

// Focal loss, mean over pixels: -(1-p)^tau log p on anomalous pixels and
// -p^tau log(1-p) on normal ones, with p clamped to [1e-7, 1-1e-7].
double focal_loss(const nn::Tensor& out, const nn::Tensor& labels, double tau);
double focal_loss_grad(const nn::Tensor& out, const nn::Tensor& labels, double tau,
                       nn::Tensor& d_out);

// total = lambda * (l2 + ssim) + focal
LossValue combine(double l2, double ssim, double focal, double lambda);
double total_loss(double self_component, double focal_component, double lambda);

// Whole-image conveniences.
double l2_loss(const Image& target, const Image& recon);
double ssim_loss(const Image& target, const Image& recon, int window);
double self_loss(const Image& target, const Image& recon, int window);
double focal_loss(const AnomalyMap& out, const PixelLabels& labels, double tau);

} // namespace sgsf::losses
