#pragma once

#include <memory>
#include <span>

#include "mmsc/distances.hpp"
#include "mmsc/params.hpp"
#include "mmsc/point_cloud.hpp"

// Reverse-mode tape sized for this project's five networks: dense double
// tensors, define-by-run recording, and the layer set the architectures
// need. No op mutates its inputs; backward accumulates with += so shared
// subgraphs are handled. Every op output is checked finite.

namespace mmsc::ad {

class Graph;

struct Node {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool needs_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;
    Param* bound = nullptr;  // trainable leaf: gradient flows back to the store

    size_t size() const { return value.size(); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
    }
};

class Tensor {
public:
    Tensor() = default;

    const std::vector<int>& shape() const { return n_->shape; }
    const std::vector<double>& value() const { return n_->value; }
    const std::vector<double>& grad() const {
        if (n_->grad.empty()) throw InvalidState("Tensor: gradient not computed");
        return n_->grad;
    }
    size_t size() const { return n_->value.size(); }
    double scalar() const {
        if (size() != 1) throw InvalidShape("Tensor: scalar() on non-scalar");
        return n_->value[0];
    }

private:
    friend class Graph;
    explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}
    std::shared_ptr<Node> n_;
};

// The gradient tape. One graph per training step; a graph and its tensors
// are confined to a single thread. Construct with recording disabled for
// pure inference.
class Graph {
public:
    explicit Graph(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }

    // ---- leaves ----

    Tensor input(std::vector<int> shape, std::vector<double> data, bool needs_grad = false) {
        if (data.size() != numel(shape)) throw InvalidShape("input: data/shape mismatch");
        auto n = std::make_shared<Node>();
        n->shape = std::move(shape);
        n->value = std::move(data);
        n->needs_grad = recording_ && needs_grad;
        return track(n);
    }

    Tensor constant(std::vector<int> shape, std::vector<double> data) {
        return input(std::move(shape), std::move(data), false);
    }

    Tensor scalar_constant(double v) { return constant({1}, {v}); }

    // Trainable leaf: after backward() the accumulated gradient is pushed
    // into the store entry. Pass trainable=false to use the current value
    // as a plain constant (frozen weights still let gradients flow through
    // the ops they feed, just not into the store).
    Tensor param(Param& p, bool trainable = true) {
        auto n = std::make_shared<Node>();
        n->shape = p.shape;
        n->value = p.value;
        n->needs_grad = recording_ && trainable && p.trainable;
        if (n->needs_grad) n->bound = &p;
        return track(n);
    }

    // ---- layer ops ----

    // y = x W^T + b. Accepts [B,I] (dense layer) or [B,I,M] (shared
    // per-point layer, i.e. a kernel-size-1 convolution over points).
    Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
        const auto& xs = x.n_->shape;
        const auto& ws = w.n_->shape;
        if (ws.size() != 2) throw InvalidShape("linear: weight must be [O,I]");
        const int out_f = ws[0], in_f = ws[1];
        if (b.n_->shape != std::vector<int>{out_f}) throw InvalidShape("linear: bias must be [O]");

        if (xs.size() == 2) {
            if (xs[1] != in_f) throw InvalidShape("linear: inner dims disagree");
            const int batch = xs[0];
            std::vector<double> y(static_cast<size_t>(batch) * out_f);
            const double* xv = x.n_->value.data();
            const double* wv = w.n_->value.data();
            const double* bv = b.n_->value.data();
            for (int bi = 0; bi < batch; ++bi) {
                const double* xr = xv + static_cast<size_t>(bi) * in_f;
                double* yr = y.data() + static_cast<size_t>(bi) * out_f;
                for (int o = 0; o < out_f; ++o) {
                    const double* wr = wv + static_cast<size_t>(o) * in_f;
                    double acc = bv[o];
                    for (int i = 0; i < in_f; ++i) acc += xr[i] * wr[i];
                    yr[o] = acc;
                }
            }
            return make_op({batch, out_f}, std::move(y), {x, w, b}, [=](Node& n) {
                Node& xn = *n.parents[0];
                Node& wn = *n.parents[1];
                Node& bn = *n.parents[2];
                const double* dy = n.grad.data();
                const double* wv2 = wn.value.data();
                const double* xv2 = xn.value.data();
                for (int bi = 0; bi < batch; ++bi) {
                    const double* dyr = dy + static_cast<size_t>(bi) * out_f;
                    if (xn.needs_grad) {
                        double* dxr = xn.grad.data() + static_cast<size_t>(bi) * in_f;
                        for (int o = 0; o < out_f; ++o) {
                            const double g = dyr[o];
                            const double* wr = wv2 + static_cast<size_t>(o) * in_f;
                            for (int i = 0; i < in_f; ++i) dxr[i] += g * wr[i];
                        }
                    }
                    if (wn.needs_grad) {
                        const double* xr = xv2 + static_cast<size_t>(bi) * in_f;
                        for (int o = 0; o < out_f; ++o) {
                            const double g = dyr[o];
                            double* dwr = wn.grad.data() + static_cast<size_t>(o) * in_f;
                            for (int i = 0; i < in_f; ++i) dwr[i] += g * xr[i];
                        }
                    }
                    if (bn.needs_grad) {
                        for (int o = 0; o < out_f; ++o) bn.grad[o] += dyr[o];
                    }
                }
            });
        }

        if (xs.size() == 3) {
            if (xs[1] != in_f) throw InvalidShape("linear: inner dims disagree");
            const int batch = xs[0], m = xs[2];
            std::vector<double> y(static_cast<size_t>(batch) * out_f * m);
            const double* xv = x.n_->value.data();
            const double* wv = w.n_->value.data();
            const double* bv = b.n_->value.data();
            for (int bi = 0; bi < batch; ++bi) {
                const double* xb = xv + static_cast<size_t>(bi) * in_f * m;
                double* yb = y.data() + static_cast<size_t>(bi) * out_f * m;
                for (int o = 0; o < out_f; ++o) {
                    double* yr = yb + static_cast<size_t>(o) * m;
                    std::fill(yr, yr + m, bv[o]);
                    const double* wr = wv + static_cast<size_t>(o) * in_f;
                    for (int i = 0; i < in_f; ++i) {
                        const double wo = wr[i];
                        const double* xr = xb + static_cast<size_t>(i) * m;
                        for (int mm = 0; mm < m; ++mm) yr[mm] += wo * xr[mm];
                    }
                }
            }
            return make_op({batch, out_f, m}, std::move(y), {x, w, b}, [=](Node& n) {
                Node& xn = *n.parents[0];
                Node& wn = *n.parents[1];
                Node& bn = *n.parents[2];
                for (int bi = 0; bi < batch; ++bi) {
                    const double* dyb = n.grad.data() + static_cast<size_t>(bi) * out_f * m;
                    const double* xb = xn.value.data() + static_cast<size_t>(bi) * in_f * m;
                    for (int o = 0; o < out_f; ++o) {
                        const double* dyr = dyb + static_cast<size_t>(o) * m;
                        const double* wr = wn.value.data() + static_cast<size_t>(o) * in_f;
                        if (xn.needs_grad) {
                            double* dxb = xn.grad.data() + static_cast<size_t>(bi) * in_f * m;
                            for (int i = 0; i < in_f; ++i) {
                                const double wo = wr[i];
                                double* dxr = dxb + static_cast<size_t>(i) * m;
                                for (int mm = 0; mm < m; ++mm) dxr[mm] += wo * dyr[mm];
                            }
                        }
                        if (wn.needs_grad) {
                            double* dwr = wn.grad.data() + static_cast<size_t>(o) * in_f;
                            for (int i = 0; i < in_f; ++i) {
                                const double* xr = xb + static_cast<size_t>(i) * m;
                                double acc = 0.0;
                                for (int mm = 0; mm < m; ++mm) acc += dyr[mm] * xr[mm];
                                dwr[i] += acc;
                            }
                        }
                        if (bn.needs_grad) {
                            double acc = 0.0;
                            for (int mm = 0; mm < m; ++mm) acc += dyr[mm];
                            bn.grad[o] += acc;
                        }
                    }
                }
            });
        }
        throw InvalidShape("linear: input must be rank 2 or 3");
    }

    Tensor relu(const Tensor& x) {
        std::vector<double> y(x.size());
        for (size_t i = 0; i < y.size(); ++i) y[i] = x.n_->value[i] > 0.0 ? x.n_->value[i] : 0.0;
        return make_op(x.n_->shape, std::move(y), {x}, [](Node& n) {
            Node& xn = *n.parents[0];
            if (!xn.needs_grad) return;
            for (size_t i = 0; i < n.size(); ++i)
                if (xn.value[i] > 0.0) xn.grad[i] += n.grad[i];
        });
    }

    Tensor leaky_relu(const Tensor& x, double slope = 0.2) {
        std::vector<double> y(x.size());
        for (size_t i = 0; i < y.size(); ++i) {
            double v = x.n_->value[i];
            y[i] = v > 0.0 ? v : slope * v;
        }
        return make_op(x.n_->shape, std::move(y), {x}, [slope](Node& n) {
            Node& xn = *n.parents[0];
            if (!xn.needs_grad) return;
            for (size_t i = 0; i < n.size(); ++i)
                xn.grad[i] += (xn.value[i] > 0.0 ? 1.0 : slope) * n.grad[i];
        });
    }

    // Per-feature normalization over the batch and point axes. Input is
    // [B,F,M] or [B,F] (treated as M=1). Train mode normalizes with batch
    // statistics and folds them into the running estimates; eval mode uses
    // the running estimates. Running stats live in the parameter store as
    // non-trainable entries.
    Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Param& run_mean,
                     Param& run_var, bool training, double momentum = 0.9, double eps = 1e-5) {
        auto xs = x.n_->shape;
        if (xs.size() == 2) xs.push_back(1);
        if (xs.size() != 3) throw InvalidShape("batchnorm: input must be [B,F,M] or [B,F]");
        const int batch = xs[0], feat = xs[1], m = xs[2];
        const size_t count = static_cast<size_t>(batch) * m;
        if (gamma.size() != static_cast<size_t>(feat) || beta.size() != static_cast<size_t>(feat))
            throw InvalidShape("batchnorm: gamma/beta must be [F]");
        if (training && count <= 1) throw InvalidInput("batchnorm: train mode needs B*M > 1");

        const double* xv = x.n_->value.data();
        auto at = [=](int bi, int f, int mm) {
            return (static_cast<size_t>(bi) * feat + f) * m + mm;
        };

        std::vector<double> mean(feat, 0.0), var(feat, 0.0);
        if (training) {
            for (int f = 0; f < feat; ++f) {
                double s = 0.0;
                for (int bi = 0; bi < batch; ++bi)
                    for (int mm = 0; mm < m; ++mm) s += xv[at(bi, f, mm)];
                mean[f] = s / static_cast<double>(count);
                double v = 0.0;
                for (int bi = 0; bi < batch; ++bi)
                    for (int mm = 0; mm < m; ++mm) {
                        double d = xv[at(bi, f, mm)] - mean[f];
                        v += d * d;
                    }
                var[f] = v / static_cast<double>(count);
            }
            for (int f = 0; f < feat; ++f) {
                run_mean.value[f] = momentum * run_mean.value[f] + (1.0 - momentum) * mean[f];
                run_var.value[f] = momentum * run_var.value[f] + (1.0 - momentum) * var[f];
            }
        } else {
            mean = run_mean.value;
            var = run_var.value;
        }

        std::vector<double> inv_std(feat);
        for (int f = 0; f < feat; ++f) inv_std[f] = 1.0 / std::sqrt(var[f] + eps);

        std::vector<double> xhat(x.size()), y(x.size());
        const double* gv = gamma.n_->value.data();
        const double* bv = beta.n_->value.data();
        for (int bi = 0; bi < batch; ++bi)
            for (int f = 0; f < feat; ++f)
                for (int mm = 0; mm < m; ++mm) {
                    size_t idx = at(bi, f, mm);
                    xhat[idx] = (xv[idx] - mean[f]) * inv_std[f];
                    y[idx] = gv[f] * xhat[idx] + bv[f];
                }

        auto xhat_keep = std::make_shared<std::vector<double>>(std::move(xhat));
        auto inv_keep = std::make_shared<std::vector<double>>(std::move(inv_std));
        return make_op(x.n_->shape, std::move(y), {x, gamma, beta},
                       [=](Node& n) {
                           Node& xn = *n.parents[0];
                           Node& gn = *n.parents[1];
                           Node& bn = *n.parents[2];
                           const auto& xh = *xhat_keep;
                           const auto& istd = *inv_keep;
                           for (int f = 0; f < feat; ++f) {
                               double sum_dy = 0.0, sum_dy_xhat = 0.0;
                               for (int bi = 0; bi < batch; ++bi)
                                   for (int mm = 0; mm < m; ++mm) {
                                       size_t idx = at(bi, f, mm);
                                       sum_dy += n.grad[idx];
                                       sum_dy_xhat += n.grad[idx] * xh[idx];
                                   }
                               if (gn.needs_grad) gn.grad[f] += sum_dy_xhat;
                               if (bn.needs_grad) bn.grad[f] += sum_dy;
                               if (!xn.needs_grad) continue;
                               const double g = gn.value[f];
                               if (training) {
                                   const double inv_count = 1.0 / static_cast<double>(count);
                                   for (int bi = 0; bi < batch; ++bi)
                                       for (int mm = 0; mm < m; ++mm) {
                                           size_t idx = at(bi, f, mm);
                                           xn.grad[idx] +=
                                               g * istd[f] *
                                               (n.grad[idx] - inv_count * sum_dy -
                                                inv_count * xh[idx] * sum_dy_xhat);
                                       }
                               } else {
                                   for (int bi = 0; bi < batch; ++bi)
                                       for (int mm = 0; mm < m; ++mm) {
                                           size_t idx = at(bi, f, mm);
                                           xn.grad[idx] += g * istd[f] * n.grad[idx];
                                       }
                               }
                           }
                       });
    }

    // Global max over the point axis, [B,F,M] -> [B,F]. Gradient routes to
    // the argmax; lowest index wins ties.
    Tensor maxpool_points(const Tensor& x) {
        const auto& xs = x.n_->shape;
        if (xs.size() != 3) throw InvalidShape("maxpool_points: input must be [B,F,M]");
        const int batch = xs[0], feat = xs[1], m = xs[2];
        std::vector<double> y(static_cast<size_t>(batch) * feat);
        auto argmax = std::make_shared<std::vector<int>>(y.size());
        const double* xv = x.n_->value.data();
        for (int bi = 0; bi < batch; ++bi)
            for (int f = 0; f < feat; ++f) {
                const double* row = xv + (static_cast<size_t>(bi) * feat + f) * m;
                int best = 0;
                for (int mm = 1; mm < m; ++mm)
                    if (row[mm] > row[best]) best = mm;
                y[static_cast<size_t>(bi) * feat + f] = row[best];
                (*argmax)[static_cast<size_t>(bi) * feat + f] = best;
            }
        return make_op({batch, feat}, std::move(y), {x}, [=](Node& n) {
            Node& xn = *n.parents[0];
            if (!xn.needs_grad) return;
            for (int bi = 0; bi < batch; ++bi)
                for (int f = 0; f < feat; ++f) {
                    size_t out_idx = static_cast<size_t>(bi) * feat + f;
                    size_t in_idx =
                        (static_cast<size_t>(bi) * feat + f) * m + (*argmax)[out_idx];
                    xn.grad[in_idx] += n.grad[out_idx];
                }
        });
    }

    // Channel-wise concatenation of [B,*] tensors sharing the batch extent.
    Tensor concat(const std::vector<Tensor>& xs) {
        if (xs.empty()) throw InvalidShape("concat: no inputs");
        const int batch = xs[0].n_->shape.at(0);
        int total = 0;
        for (const auto& t : xs) {
            if (t.n_->shape.size() != 2 || t.n_->shape[0] != batch)
                throw InvalidShape("concat: inputs must be [B,*] with a shared batch");
            total += t.n_->shape[1];
        }
        std::vector<double> y(static_cast<size_t>(batch) * total);
        int off = 0;
        for (const auto& t : xs) {
            const int f = t.n_->shape[1];
            for (int bi = 0; bi < batch; ++bi)
                std::copy_n(t.n_->value.data() + static_cast<size_t>(bi) * f, f,
                            y.data() + static_cast<size_t>(bi) * total + off);
            off += f;
        }
        std::vector<Tensor> parents = xs;
        return make_op({batch, total}, std::move(y), parents, [=](Node& n) {
            int o = 0;
            for (auto& pn : n.parents) {
                const int f = pn->shape[1];
                if (pn->needs_grad) {
                    for (int bi = 0; bi < batch; ++bi) {
                        const double* src = n.grad.data() + static_cast<size_t>(bi) * total + o;
                        double* dst = pn->grad.data() + static_cast<size_t>(bi) * f;
                        for (int i = 0; i < f; ++i) dst[i] += src[i];
                    }
                }
                o += f;
            }
        });
    }

    // Re-lays decoded xyz rows [B, N*3] as encoder channels [B, 3, N] so a
    // decoded cloud can feed a PointNet trunk inside one graph.
    Tensor rows_to_channels(const Tensor& y) {
        const auto [batch, n_points] = cloud_rows(y);
        std::vector<double> out(y.size());
        const double* yv = y.n_->value.data();
        for (int bi = 0; bi < batch; ++bi) {
            const double* row = yv + static_cast<size_t>(bi) * n_points * 3;
            double* dst = out.data() + static_cast<size_t>(bi) * n_points * 3;
            for (int k = 0; k < 3; ++k)
                for (int i = 0; i < n_points; ++i)
                    dst[static_cast<size_t>(k) * n_points + i] = row[3 * i + k];
        }
        const int np = n_points, b2 = batch;
        return make_op({batch, 3, n_points}, std::move(out), {y}, [np, b2](Node& n) {
            Node& yn = *n.parents[0];
            if (!yn.needs_grad) return;
            for (int bi = 0; bi < b2; ++bi) {
                const double* src = n.grad.data() + static_cast<size_t>(bi) * np * 3;
                double* drow = yn.grad.data() + static_cast<size_t>(bi) * np * 3;
                for (int k = 0; k < 3; ++k)
                    for (int i = 0; i < np; ++i)
                        drow[3 * i + k] += src[static_cast<size_t>(k) * np + i];
            }
        });
    }

    // ---- arithmetic on matching shapes / scalars ----

    Tensor add(const Tensor& a, const Tensor& b) {
        if (a.n_->shape != b.n_->shape) throw InvalidShape("add: shape mismatch");
        std::vector<double> y(a.size());
        for (size_t i = 0; i < y.size(); ++i) y[i] = a.n_->value[i] + b.n_->value[i];
        return make_op(a.n_->shape, std::move(y), {a, b}, [](Node& n) {
            for (auto& pn : n.parents)
                if (pn->needs_grad)
                    for (size_t i = 0; i < n.size(); ++i) pn->grad[i] += n.grad[i];
        });
    }

    Tensor scale(const Tensor& a, double s) {
        std::vector<double> y(a.size());
        for (size_t i = 0; i < y.size(); ++i) y[i] = s * a.n_->value[i];
        return make_op(a.n_->shape, std::move(y), {a}, [s](Node& n) {
            Node& an = *n.parents[0];
            if (!an.needs_grad) return;
            for (size_t i = 0; i < n.size(); ++i) an.grad[i] += s * n.grad[i];
        });
    }

    // z = mu + exp(logvar / 2) * eps with eps fixed by the caller.
    Tensor reparameterize(const Tensor& mu, const Tensor& logvar, std::vector<double> eps) {
        if (mu.n_->shape != logvar.n_->shape || eps.size() != mu.size())
            throw InvalidShape("reparameterize: shape mismatch");
        std::vector<double> y(mu.size());
        auto eps_keep = std::make_shared<std::vector<double>>(std::move(eps));
        for (size_t i = 0; i < y.size(); ++i)
            y[i] = mu.n_->value[i] + std::exp(0.5 * logvar.n_->value[i]) * (*eps_keep)[i];
        return make_op(mu.n_->shape, std::move(y), {mu, logvar}, [eps_keep](Node& n) {
            Node& mn = *n.parents[0];
            Node& ln = *n.parents[1];
            for (size_t i = 0; i < n.size(); ++i) {
                if (mn.needs_grad) mn.grad[i] += n.grad[i];
                if (ln.needs_grad)
                    ln.grad[i] +=
                        n.grad[i] * 0.5 * std::exp(0.5 * ln.value[i]) * (*eps_keep)[i];
            }
        });
    }

    // ---- scalar losses ----

    // mean over all entries of (x - target)^2
    Tensor mean_square_to(const Tensor& x, double target) {
        const double inv = 1.0 / static_cast<double>(x.size());
        double acc = 0.0;
        for (double v : x.n_->value) acc += (v - target) * (v - target);
        return make_op({1}, {acc * inv}, {x}, [target, inv](Node& n) {
            Node& xn = *n.parents[0];
            if (!xn.needs_grad) return;
            const double g = n.grad[0];
            for (size_t i = 0; i < xn.size(); ++i)
                xn.grad[i] += g * 2.0 * (xn.value[i] - target) * inv;
        });
    }

    // mean over all entries of |x - target|; subgradient 0 at zero.
    Tensor l1_to(const Tensor& x, std::vector<double> target) {
        if (target.size() != x.size()) throw InvalidShape("l1_to: target size mismatch");
        const double inv = 1.0 / static_cast<double>(x.size());
        double acc = 0.0;
        for (size_t i = 0; i < x.size(); ++i) acc += std::abs(x.n_->value[i] - target[i]);
        auto keep = std::make_shared<std::vector<double>>(std::move(target));
        return make_op({1}, {acc * inv}, {x}, [keep, inv](Node& n) {
            Node& xn = *n.parents[0];
            if (!xn.needs_grad) return;
            const double g = n.grad[0];
            for (size_t i = 0; i < xn.size(); ++i) {
                double d = xn.value[i] - (*keep)[i];
                if (d > 0.0)
                    xn.grad[i] += g * inv;
                else if (d < 0.0)
                    xn.grad[i] -= g * inv;
            }
        });
    }

    // Batch mean of KL(N(mu, exp(logvar)) || N(0, I)); closed form
    // -1/2 * sum_d (1 + logvar - mu^2 - exp(logvar)) per sample.
    Tensor kl_standard_normal(const Tensor& mu, const Tensor& logvar) {
        if (mu.n_->shape != logvar.n_->shape) throw InvalidShape("kl: shape mismatch");
        if (mu.n_->shape.size() != 2) throw InvalidShape("kl: expects [B,Z]");
        const int batch = mu.n_->shape[0];
        const double inv_b = 1.0 / static_cast<double>(batch);
        double acc = 0.0;
        for (size_t i = 0; i < mu.size(); ++i) {
            double m = mu.n_->value[i], lv = logvar.n_->value[i];
            acc += -0.5 * (1.0 + lv - m * m - std::exp(lv));
        }
        return make_op({1}, {acc * inv_b}, {mu, logvar}, [inv_b](Node& n) {
            Node& mn = *n.parents[0];
            Node& ln = *n.parents[1];
            const double g = n.grad[0] * inv_b;
            for (size_t i = 0; i < mn.size(); ++i) {
                if (mn.needs_grad) mn.grad[i] += g * mn.value[i];
                if (ln.needs_grad) ln.grad[i] += g * 0.5 * (std::exp(ln.value[i]) - 1.0);
            }
        });
    }

    // ---- geometry-bridged losses ----
    // Decoded clouds are flat rows of xyz triples: y is [B, N*3].

    // Batch mean of the exact EMD between each decoded cloud and its target.
    // The per-item assignment problems fan out across `threads` workers and
    // join in index order, so results do not depend on the worker count.
    Tensor emd_loss(const Tensor& y, std::span<const PointCloud> targets, unsigned threads = 1) {
        const auto [batch, n_points] = cloud_rows(y);
        if (targets.size() != static_cast<size_t>(batch))
            throw InvalidInput("emd_loss: batch/target mismatch");
        for (const auto& t : targets)
            if (t.size() != static_cast<size_t>(n_points))
                throw InvalidInput("emd_loss: target cardinality mismatch");

        auto matchings = std::make_shared<std::vector<Matching>>(batch);
        std::vector<double> costs(batch);
        const double* yv = y.n_->value.data();
        parallel_for(static_cast<size_t>(batch), threads, [&](size_t bi) {
            PointCloud decoded = row_cloud(yv, bi, n_points);
            (*matchings)[bi] = emd(decoded, targets[bi]);
            costs[bi] = (*matchings)[bi].cost;
        });
        double mean_cost = 0.0;
        for (double c : costs) mean_cost += c;
        mean_cost /= static_cast<double>(batch);

        std::vector<PointCloud> targets_keep(targets.begin(), targets.end());
        auto tk = std::make_shared<std::vector<PointCloud>>(std::move(targets_keep));
        return make_op({1}, {mean_cost}, {y}, [=](Node& n) {
            Node& yn = *n.parents[0];
            if (!yn.needs_grad) return;
            const double g = n.grad[0] / static_cast<double>(batch);
            const double inv_m = 1.0 / static_cast<double>(n_points);
            for (int bi = 0; bi < batch; ++bi) {
                const auto& match = (*matchings)[bi];
                const double* row = yn.value.data() + static_cast<size_t>(bi) * n_points * 3;
                double* drow = yn.grad.data() + static_cast<size_t>(bi) * n_points * 3;
                for (int i = 0; i < n_points; ++i) {
                    const auto& q = (*tk)[bi][match.assignment[i]];
                    Vec3 d{row[3 * i] - q[0], row[3 * i + 1] - q[1], row[3 * i + 2] - q[2]};
                    double len = norm(d);
                    if (len == 0.0) continue;
                    const double s = g * inv_m / len;
                    drow[3 * i] += s * d[0];
                    drow[3 * i + 1] += s * d[1];
                    drow[3 * i + 2] += s * d[2];
                }
            }
        });
    }

    // Batch mean of the unidirectional Hausdorff distance from each partial
    // to its decoded completion.
    Tensor hausdorff_loss(const Tensor& y, std::span<const PointCloud> partials,
                          unsigned threads = 1) {
        const auto [batch, n_points] = cloud_rows(y);
        if (partials.size() != static_cast<size_t>(batch))
            throw InvalidInput("hausdorff_loss: batch/partial mismatch");

        std::vector<double> dists(batch);
        auto grads = std::make_shared<std::vector<std::vector<Vec3>>>(batch);
        const double* yv = y.n_->value.data();
        std::vector<PointCloud> pk(partials.begin(), partials.end());
        parallel_for(static_cast<size_t>(batch), threads, [&](size_t bi) {
            PointCloud decoded = row_cloud(yv, bi, n_points);
            dists[bi] = hausdorff_uni(pk[bi], decoded);
            (*grads)[bi] = hausdorff_uni_grad(pk[bi], decoded);
        });
        double mean_d = 0.0;
        for (double d : dists) mean_d += d;
        mean_d /= static_cast<double>(batch);

        return make_op({1}, {mean_d}, {y}, [=](Node& n) {
            Node& yn = *n.parents[0];
            if (!yn.needs_grad) return;
            const double g = n.grad[0] / static_cast<double>(batch);
            for (int bi = 0; bi < batch; ++bi) {
                double* drow = yn.grad.data() + static_cast<size_t>(bi) * n_points * 3;
                const auto& gb = (*grads)[bi];
                for (int j = 0; j < n_points; ++j)
                    for (int k = 0; k < 3; ++k) drow[3 * j + k] += g * gb[j][k];
            }
        });
    }

    // ---- reverse pass ----

    void backward(const Tensor& loss) {
        if (!recording_) throw InvalidState("backward: graph is not recording");
        if (loss.size() != 1) throw InvalidShape("backward: loss must be scalar");
        loss.n_->ensure_grad();
        loss.n_->grad[0] = 1.0;
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            Node& n = **it;
            if (!n.needs_grad || !n.backprop) continue;
            if (n.grad.empty()) continue;  // never reached from the loss
            n.backprop(n);
        }
        for (auto& n : order_) {
            if (n->bound && !n->grad.empty()) {
                Param& p = *n->bound;
                for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n->grad[i];
                p.has_grad = true;
            }
        }
    }

private:
    static std::pair<int, int> cloud_rows(const Tensor& y) {
        const auto& s = y.n_->shape;
        if (s.size() != 2 || s[1] % 3 != 0)
            throw InvalidShape("expected [B, N*3] cloud rows");
        return {s[0], s[1] / 3};
    }

    static PointCloud row_cloud(const double* yv, size_t bi, int n_points) {
        std::vector<Vec3> pts(n_points);
        const double* row = yv + bi * static_cast<size_t>(n_points) * 3;
        for (int i = 0; i < n_points; ++i) pts[i] = {row[3 * i], row[3 * i + 1], row[3 * i + 2]};
        return PointCloud(std::move(pts));
    }

    Tensor track(std::shared_ptr<Node> n) {
        check_finite(n->value);
        if (recording_) order_.push_back(n);
        return Tensor(std::move(n));
    }

    Tensor make_op(std::vector<int> shape, std::vector<double> value,
                   const std::vector<Tensor>& parents, std::function<void(Node&)> backprop) {
        auto n = std::make_shared<Node>();
        n->shape = std::move(shape);
        n->value = std::move(value);
        bool any = false;
        for (const auto& p : parents) any = any || p.n_->needs_grad;
        if (recording_ && any) {
            n->needs_grad = true;
            n->parents.reserve(parents.size());
            for (const auto& p : parents) {
                p.n_->ensure_grad();
                n->parents.push_back(p.n_);
            }
            n->backprop = std::move(backprop);
        }
        return track(n);
    }

    static void check_finite(const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) throw DiagnosticError("non-finite value in op output");
    }

    bool recording_;
    std::vector<std::shared_ptr<Node>> order_;
};

// ---------------------------------------------------------------------------
// Central finite-difference check of a scalar-valued tensor function.
// Returns the max relative error over the checked coordinates,
// |a - n| / max(1, |a|, |n|) per coordinate.
// ---------------------------------------------------------------------------

using TensorFn = std::function<Tensor(Graph&, const Tensor&)>;

inline double grad_check(const TensorFn& f, const std::vector<int>& shape,
                         const std::vector<double>& x0, double step = 1e-5,
                         const std::vector<size_t>& coords = {}) {
    Graph g;
    Tensor x = g.input(shape, x0, true);
    Tensor loss = f(g, x);
    if (loss.size() != 1) throw InvalidShape("grad_check: f must be scalar-valued");
    if (!std::isfinite(loss.scalar())) throw DiagnosticError("grad_check: non-finite f");
    g.backward(loss);
    std::vector<double> analytic = x.grad();

    auto eval = [&](const std::vector<double>& xv) {
        Graph ng(false);
        Tensor xt = ng.input(shape, xv, false);
        double v = f(ng, xt).scalar();
        if (!std::isfinite(v)) throw DiagnosticError("grad_check: non-finite f");
        return v;
    };

    std::vector<size_t> idx = coords;
    if (idx.empty()) {
        idx.resize(x0.size());
        std::iota(idx.begin(), idx.end(), size_t{0});
    }
    double worst = 0.0;
    std::vector<double> xv = x0;
    for (size_t i : idx) {
        const double keep = xv[i];
        xv[i] = keep + step;
        double up = eval(xv);
        xv[i] = keep - step;
        double dn = eval(xv);
        xv[i] = keep;
        double numeric = (up - dn) / (2.0 * step);
        double err = std::abs(analytic[i] - numeric) /
                     std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace mmsc::ad
