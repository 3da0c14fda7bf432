#include "greg/trainer.hpp"

#include "greg/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

namespace greg {
namespace {

Index argmax_col(const Eigen::Ref<const Vector>& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// Fraction of columns whose argmax of D F + c matches the one-hot label.
double accuracy(const AffineHead& head, const Matrix& F, const Matrix& Y, int workers) {
    const Index T = F.cols();
    const Index nchunks = chunk_count(T);
    std::vector<Index> hits(size_t(nchunks), 0);
    for_each_chunk(T, workers, [&](Index c, Index begin, Index end) {
        const Index len = end - begin;
        Matrix scores = head.D * F.middleCols(begin, len);
        scores.colwise() += head.c;
        Index local = 0;
        for (Index t = 0; t < len; ++t)
            if (argmax_col(scores.col(t)) == argmax_col(Y.col(begin + t))) ++local;
        hits[size_t(c)] = local;
    });
    const Index total = std::accumulate(hits.begin(), hits.end(), Index{0});
    return double(total) / double(T);
}

double mse_of(const Matrix& Z, int workers) {
    return mean_column_dot(Z, Z, workers);
}

Index conv_grid_side(Index d) {
    const auto side = Index(std::llround(std::sqrt(double(d))));
    if (side * side != d)
        throw ConfigError("conv stages need d to be a perfect square, got d = " +
                          std::to_string(d));
    return side;
}

void validate(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data) {
    const Index n = train_data.n();
    if (n <= 0 || train_data.m() <= 0 || train_data.samples() <= 0)
        throw DataError("training set is empty");
    if (test_data.n() != n || test_data.m() != train_data.m())
        throw DataError("train/test dimensions differ");
    if (cfg.d < 1 || cfg.d > n)
        throw ConfigError("need 1 <= d <= input dimension");
    if (cfg.r < 0 || cfg.r > 1)
        throw ConfigError("r must be 0 or 1 (only the raw-input fixed function exists)");
    if (cfg.minibatch < 0)
        throw ConfigError("minibatch must be >= 0");
    for (size_t i = 0; i < cfg.stages.size(); ++i) {
        const StageConfig& st = cfg.stages[i];
        const std::string where = "stage " + std::to_string(i) + ": ";
        if (st.iterations < 1) throw ConfigError(where + "iterations must be >= 1");
        if (st.step == StepPolicy::fixed && !(st.mu > 0.0))
            throw ConfigError(where + "fixed step needs mu > 0");
        auto check_coeff = [&](double a, const char* name) {
            if (!(a >= 0.0 && a < 1.0))
                throw ConfigError(where + std::string(name) + " must be in [0, 1)");
        };
        check_coeff(st.alpha0, "alpha0");
        check_coeff(st.beta, "beta");
        if (Index(st.alpha.size()) != cfg.r)
            throw ConfigError(where + "need exactly r alpha_k coefficients");
        for (double a : st.alpha) check_coeff(a, "alpha_k");
        if (st.kind == LayerKind::conv) {
            const Index side = conv_grid_side(cfg.d);
            if (st.window % 2 == 0 || st.window < 1)
                throw ConfigError(where + "conv window must be odd");
            if (side < st.window)
                throw ConfigError(where + "conv window larger than feature grid");
        }
    }
}

// Columns of M at the given indices, gathered into a fresh matrix.
Matrix gather_columns(const Matrix& M, const std::vector<Index>& idx) {
    Matrix out(M.rows(), Index(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) out.col(Index(j)) = M.col(idx[j]);
    return out;
}

// Seeded sampler handing out minibatch index sets; reshuffles per epoch.
class BatchSampler {
public:
    BatchSampler(Index total, Index batch, uint64_t seed)
        : total_(total), batch_(std::min(batch, total)), rng_(seed) {
        perm_.resize(size_t(total));
        std::iota(perm_.begin(), perm_.end(), Index{0});
        reshuffle();
    }

    std::vector<Index> next() {
        std::vector<Index> idx;
        idx.reserve(size_t(batch_));
        for (Index i = 0; i < batch_; ++i) {
            if (cursor_ == total_) reshuffle();
            idx.push_back(perm_[size_t(cursor_++)]);
        }
        return idx;
    }

private:
    void reshuffle() {
        std::shuffle(perm_.begin(), perm_.end(), rng_);
        cursor_ = 0;
    }

    Index total_;
    Index batch_;
    std::mt19937_64 rng_;
    std::vector<Index> perm_;
    Index cursor_ = 0;
};

}  // namespace

std::optional<Vector> conv_project_direction(Direction& dir, const ConvStructure& s,
                                             bool unit_norm) {
    auto proj = project_to_conv(dir.w0, s);
    if (!proj) return std::nullopt;
    Vector coeffs = unit_norm ? Vector(proj->kernel / proj->pnorm) : proj->kernel;
    dir.w0 = unit_norm ? std::move(proj->wconv) : conv_matrix(s, coeffs);
    return coeffs;
}

TrainResult train(const Dataset& train_data, const Dataset& test_data,
                  const TrainConfig& cfg, const RunOptions& opts) {
    validate(cfg, train_data, test_data);
    const int workers = resolve_workers(opts.workers);
    const Index T = train_data.samples();
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    TrainResult result;
    ModelState& model = result.model;
    model.act = Activation::from_id(cfg.activation);
    model.fixed.assign(size_t(cfg.r), FixedFunction::raw_input);
    model.U = compute_pca_basis(train_data.X, cfg.d, workers);

    Matrix F(cfg.d, T);
    for_each_chunk(T, workers, [&](Index, Index begin, Index end) {
        F.middleCols(begin, end - begin).noalias() =
            model.U * train_data.X.middleCols(begin, end - begin);
    });
    Matrix Ftest(cfg.d, test_data.samples());
    for_each_chunk(test_data.samples(), workers, [&](Index, Index begin, Index end) {
        Ftest.middleCols(begin, end - begin).noalias() =
            model.U * test_data.X.middleCols(begin, end - begin);
    });

    model.head = fit_head(F, train_data.Y, workers);

    const FixedValues fk = fixed_values(model, train_data.X);
    const FixedValues fk_test = fixed_values(model, test_data.X);

    const auto push_metrics = [&](Index iteration, Index stage, double mu) {
        MetricsRow row;
        row.iteration = iteration;
        row.stage = stage;
        row.mu = mu;
        Matrix Z = residual(train_data.Y, F, model.head, workers);
        row.train_mse = mse_of(Z, workers);
        row.train_acc = accuracy(model.head, F, train_data.Y, workers);
        row.test_acc = accuracy(model.head, Ftest, test_data.Y, workers);
        row.wallclock_s = elapsed();
        if (!std::isfinite(row.train_mse))
            throw NumericError("training aborted: non-finite loss at iteration " +
                               std::to_string(iteration));
        result.metrics.push_back(row);
        if (opts.log) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "iter %4lld stage %2lld mu %10.6g mse %.6f train %.4f test %.4f",
                          static_cast<long long>(iteration), static_cast<long long>(stage),
                          mu, row.train_mse, row.train_acc, row.test_acc);
            (*opts.log) << buf << std::endl;
        }
    };

    push_metrics(0, -1, 0.0);

    const Index batch = cfg.minibatch > 0 ? std::min(cfg.minibatch, T) : T;
    const bool full_batch = batch == T;
    BatchSampler sampler(T, batch, cfg.seed);

    Index global_it = 0;
    for (size_t stage_idx = 0; stage_idx < cfg.stages.size(); ++stage_idx) {
        const StageConfig& stage = cfg.stages[stage_idx];

        ConvStructure cs;
        if (stage.kind == LayerKind::conv) {
            const Index side = conv_grid_side(cfg.d);
            cs = build_conv_structure(side, side, stage.window);
        }

        std::vector<Index> dk;
        for (const FixedFunction f : model.fixed)
            dk.push_back(f == FixedFunction::raw_input ? train_data.n() : 0);
        Momentum mom = Momentum::zero(cfg.d, dk, stage.alpha0, stage.alpha, stage.beta);
        Vector v0_coeffs;
        bool v0_is_conv = stage.kind == LayerKind::conv;
        if (v0_is_conv) v0_coeffs = Vector::Zero(stage.window * stage.window);

        StageReport report{Index(stage_idx), 0, "completed"};
        for (Index it = 1; it <= stage.iterations; ++it) {
            // Residual and direction over the batch (the whole set by default).
            Direction dir;
            Matrix Zb;
            std::vector<Index> batch_idx;
            if (full_batch) {
                Zb = residual(train_data.Y, F, model.head, workers);
                dir = compute_direction(F, fk, Zb, model.head.D, model.act, workers);
            } else {
                batch_idx = sampler.next();
                const Matrix Fb = gather_columns(F, batch_idx);
                const Matrix Yb = gather_columns(train_data.Y, batch_idx);
                const Matrix Xb = gather_columns(train_data.X, batch_idx);
                FixedValues fkb;
                if (cfg.r == 1) fkb.emplace_back(std::cref(Xb));
                Zb = residual(Yb, Fb, model.head, workers);
                dir = compute_direction(Fb, fkb, Zb, model.head.D, model.act, workers);
            }

            if (stage.kind == LayerKind::conv) {
                auto coeffs = conv_project_direction(dir, cs, stage.conv_unit_norm);
                if (coeffs && v0_is_conv)
                    v0_coeffs = stage.alpha0 * v0_coeffs + *coeffs;
                else
                    v0_is_conv = false;  // fell back to the dense direction
            }

            momentum_update(mom, dir);
            const Matrix psi = direction_vector(mom, F, fk, model.act, workers);

            double mu = stage.mu;
            if (stage.step == StepPolicy::line_search) {
                Matrix Dpsi;
                if (full_batch) {
                    Dpsi.resize(model.m(), T);
                    for_each_chunk(T, workers, [&](Index, Index begin, Index end) {
                        Dpsi.middleCols(begin, end - begin).noalias() =
                            model.head.D * psi.middleCols(begin, end - begin);
                    });
                } else {
                    Dpsi = model.head.D * gather_columns(psi, batch_idx);
                }
                const auto step = line_search_step(Zb, Dpsi, workers);
                if (!step) {
                    report.termination = "degenerate_direction";
                    break;
                }
                mu = *step;
            }

            for_each_chunk(T, workers, [&](Index, Index begin, Index end) {
                F.middleCols(begin, end - begin) += mu * psi.middleCols(begin, end - begin);
            });
            const Matrix psi_test = direction_vector(mom, Ftest, fk_test, model.act, workers);
            for_each_chunk(Ftest.cols(), workers, [&](Index, Index begin, Index end) {
                Ftest.middleCols(begin, end - begin) +=
                    mu * psi_test.middleCols(begin, end - begin);
            });

            Layer layer;
            layer.kind = v0_is_conv ? LayerKind::conv : LayerKind::plain;
            if (v0_is_conv) {
                layer.v0_kernel = {cs.grid_rows, cs.grid_cols, cs.window, v0_coeffs};
            } else {
                layer.v0 = mom.v0;
            }
            layer.vk = mom.vk;
            layer.e = mom.e;
            layer.mu = mu;
            model.layers.push_back(std::move(layer));

            if (stage.update_head) model.head = fit_head(F, train_data.Y, workers);

            push_metrics(++global_it, Index(stage_idx), mu);
            report.iterations_run = it;
        }
        result.stage_reports.push_back(std::move(report));
    }
    return result;
}

EvalResult evaluate(const ModelState& model, const Dataset& data, int workers) {
    if (data.n() != model.n() || data.m() != model.m())
        throw DataError("evaluate: dataset dimensions do not match the model");
    const Matrix F = forward_batch(model, data.X, workers);
    const Matrix Z = residual(data.Y, F, model.head, workers);
    return {mse_of(Z, workers), accuracy(model.head, F, data.Y, workers)};
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows,
                       const std::vector<std::string>& header_comments) {
    for (const std::string& line : header_comments) out << "# " << line << "\n";
    out << "iteration,stage,mu,train_mse,train_acc,test_acc,wallclock_s\n";
    char buf[512];
    for (const MetricsRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                      static_cast<long long>(r.iteration), static_cast<long long>(r.stage),
                      r.mu, r.train_mse, r.train_acc, r.test_acc, r.wallclock_s);
        out << buf;
    }
}

}  // namespace greg
