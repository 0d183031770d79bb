#include "eigenlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "eigenlab/error.hpp"
#include "eigenlab/rng.hpp"

namespace eigenlab::linalg {

DenseSymMatrix::DenseSymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw InputError("DenseSymMatrix: matrix must be square with n >= 1");
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            if (!std::isfinite(m_(i, j))) throw InputError("DenseSymMatrix: non-finite entry");
            if (m_(i, j) != m_(j, i)) throw InputError("DenseSymMatrix: matrix is not symmetric");
        }
    }
}

SparseSymOperator SparseSymOperator::from_edges(std::size_t n, std::vector<Edge> edges) {
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
    for (const Edge& e : edges) {
        if (e.i >= n || e.j >= n) throw InputError("SparseSymOperator: edge index out of range");
        if (e.i == e.j) throw InputError("SparseSymOperator: self loops are not allowed");
        if (!(e.w > 0.0) || !std::isfinite(e.w)) throw InputError("SparseSymOperator: edge weights must be positive and finite");
        rows[e.i].emplace_back(e.j, e.w);
        rows[e.j].emplace_back(e.i, e.w);
    }
    edges.clear();
    edges.shrink_to_fit();

    SparseSymOperator op;
    op.row_ptr_.assign(n + 1, 0);
    op.degree_.assign(n, 0.0);
    std::size_t total = 0;
    for (auto& r : rows) total += r.size();
    op.col_.reserve(total);
    op.w_.reserve(total);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = rows[i];
        std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t p = 0; p < r.size(); ++p) {
            if (p > 0 && r[p].first == r[p - 1].first) throw InputError("SparseSymOperator: duplicate edge");
            op.col_.push_back(r[p].first);
            op.w_.push_back(r[p].second);
            op.degree_[i] += r[p].second;
        }
        op.row_ptr_[i + 1] = op.col_.size();
        r.clear();
        r.shrink_to_fit();
    }
    return op;
}

std::size_t SparseSymOperator::isolated_count() const noexcept {
    return static_cast<std::size_t>(std::count(degree_.begin(), degree_.end(), 0.0));
}

Eigen::VectorXd SparseSymOperator::apply(const Eigen::VectorXd& x) const {
    const std::size_t nn = n();
    if (static_cast<std::size_t>(x.size()) != nn) throw InputError("SparseSymOperator::apply: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
    for (std::size_t i = 0; i < nn; ++i) {
        if (degree_[i] == 0.0) continue;
        double s = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += w_[p] * x[static_cast<Eigen::Index>(col_[p])];
        y[static_cast<Eigen::Index>(i)] = s / degree_[i] - x[static_cast<Eigen::Index>(i)];
    }
    return y;
}

Eigen::VectorXd SparseSymOperator::apply_symmetric(const Eigen::VectorXd& x) const {
    const std::size_t nn = n();
    if (static_cast<std::size_t>(x.size()) != nn) throw InputError("SparseSymOperator::apply_symmetric: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
    for (std::size_t i = 0; i < nn; ++i) {
        if (degree_[i] == 0.0) continue;
        double s = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            s += w_[p] / std::sqrt(degree_[i] * degree_[col_[p]]) * x[static_cast<Eigen::Index>(col_[p])];
        }
        y[static_cast<Eigen::Index>(i)] = s - x[static_cast<Eigen::Index>(i)];
    }
    return y;
}

Eigen::MatrixXd SparseSymOperator::dense() const {
    const auto nn = static_cast<Eigen::Index>(n());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nn, nn);
    for (std::size_t i = 0; i < n(); ++i) {
        if (degree_[i] == 0.0) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) m(ii, static_cast<Eigen::Index>(col_[p])) = w_[p] / degree_[i];
        m(ii, ii) = -1.0;
    }
    return m;
}

Eigen::MatrixXd SparseSymOperator::dense_symmetric() const {
    const auto nn = static_cast<Eigen::Index>(n());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nn, nn);
    for (std::size_t i = 0; i < n(); ++i) {
        if (degree_[i] == 0.0) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            m(ii, static_cast<Eigen::Index>(col_[p])) = w_[p] / std::sqrt(degree_[i] * degree_[col_[p]]);
        }
        m(ii, ii) = -1.0;
    }
    return m;
}

void SparseSymOperator::write_coo(std::ostream& os) const {
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < n(); ++i) {
        if (degree_[i] != 0.0) nnz += row_end(i) - row_begin(i) + 1;
    }
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << n() << ' ' << nnz << " convention=averaging\n";
    for (std::size_t i = 0; i < n(); ++i) {
        if (degree_[i] == 0.0) continue;
        bool diag_done = false;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            if (!diag_done && col_[p] > i) {
                buf << i << ' ' << i << ' ' << -1.0 << '\n';
                diag_done = true;
            }
            buf << i << ' ' << col_[p] << ' ' << w_[p] / degree_[i] << '\n';
        }
        if (!diag_done) buf << i << ' ' << i << ' ' << -1.0 << '\n';
    }
    os << buf.str();
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    if (v.size() == 0) return;
    const double mx = v.cwiseAbs().maxCoeff();
    if (mx == 0.0) return;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= (1.0 - 1e-9) * mx) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

Spectrum eigh_dense(const DenseSymMatrix& m, double reconstruction_tol) {
    const Eigen::MatrixXd& a = m.entries();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw NumericError("eigh_dense: eigensolver failed");
    Spectrum s;
    const Eigen::VectorXd& ev = es.eigenvalues();
    s.values.assign(ev.data(), ev.data() + ev.size());
    s.vectors = es.eigenvectors();
    const double norm = a.norm();
    const double rec = (a - s.vectors * ev.asDiagonal() * s.vectors.transpose()).norm();
    s.residuals.resize(s.values.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        s.residuals[static_cast<std::size_t>(k)] = (a * s.vectors.col(k) - ev[k] * s.vectors.col(k)).norm();
    }
    if (rec > reconstruction_tol * std::max(norm, std::numeric_limits<double>::min())) {
        throw NumericError("eigh_dense: reconstruction error above tolerance", {rec / norm});
    }
    return s;
}

namespace {

struct RitzSet {
    std::vector<double> theta;  // descending
    Eigen::MatrixXd u;          // n x k, orthonormal
    std::vector<double> resid;
    bool converged = false;
};

// Krylov-Schur iteration for the k algebraically largest eigenpairs of the
// symmetric operator restricted to the complement of span(q) and of the masked
// (isolated) coordinates.
class KrylovSchur {
public:
    KrylovSchur(const SparseSymOperator& op, const std::vector<char>& active, std::size_t active_count, CounterRng& rng)
        : op_(op), active_(active), active_count_(active_count), rng_(rng) {}

    RitzSet run(std::size_t k, const Eigen::MatrixXd& q, double tol, std::size_t basis, std::size_t& matvec_budget) {
        const auto n = static_cast<Eigen::Index>(op_.n());
        const std::size_t avail = active_count_ - static_cast<std::size_t>(q.cols());
        const std::size_t m = std::min(std::max(basis, k + 1), avail);

        Eigen::MatrixXd v(n, static_cast<Eigen::Index>(m + 1));
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m));
        if (!random_orthogonal(v, 0, q)) throw NumericError("eigs: could not build a start vector");

        std::size_t start = 0;
        RitzSet out;
        while (true) {
            std::size_t mcur = m;
            bool exhausted = false;
            for (std::size_t j = start; j < m; ++j) {
                if (matvec_budget == 0) {
                    mcur = j;
                    break;
                }
                --matvec_budget;
                const auto jj = static_cast<Eigen::Index>(j);
                Eigen::VectorXd w = op_.apply_symmetric(v.col(jj));
                Eigen::VectorXd coeff = Eigen::VectorXd::Zero(jj + 1);
                for (int pass = 0; pass < 2; ++pass) {
                    Eigen::VectorXd c = v.leftCols(jj + 1).transpose() * w;
                    w.noalias() -= v.leftCols(jj + 1) * c;
                    coeff += c;
                    if (q.cols() > 0) w.noalias() -= q * (q.transpose() * w);
                }
                h.block(0, jj, jj + 1, 1) = coeff;
                const double beta = w.norm();
                const double scale = std::max(1.0, coeff.cwiseAbs().maxCoeff());
                if (beta > 1e-10 * scale) {
                    v.col(jj + 1) = w / beta;
                    h(jj + 1, jj) = beta;
                } else {
                    h(jj + 1, jj) = 0.0;
                    if (!random_orthogonal(v, j + 1, q)) {
                        mcur = j + 1;
                        exhausted = true;
                        break;
                    }
                }
            }
            const auto mc = static_cast<Eigen::Index>(mcur);
            if (mc < static_cast<Eigen::Index>(k)) {
                throw NumericError("eigs: iteration budget exhausted before the Krylov basis reached size k");
            }
            Eigen::MatrixXd hm = h.topLeftCorner(mc, mc);
            hm = 0.5 * (hm + hm.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
            if (es.info() != Eigen::Success) throw NumericError("eigs: projected eigensolver failed");
            // descending order
            const Eigen::VectorXd theta = es.eigenvalues().reverse();
            const Eigen::MatrixXd y = es.eigenvectors().rowwise().reverse();
            const double beta = exhausted ? 0.0 : h(mc, mc - 1);

            bool all_ok = true;
            std::vector<double> res(k);
            for (std::size_t i = 0; i < k; ++i) {
                res[i] = std::abs(beta * y(mc - 1, static_cast<Eigen::Index>(i)));
                if (res[i] > tol) all_ok = false;
            }
            const bool stop = all_ok || exhausted || mcur < m || matvec_budget == 0;
            if (stop) {
                out.theta.assign(theta.data(), theta.data() + k);
                out.u = v.leftCols(mc) * y.leftCols(static_cast<Eigen::Index>(k));
                out.resid = res;
                out.converged = all_ok || exhausted;
                return out;
            }

            const std::size_t keep = std::min(k + (mcur - k) / 2, mcur - 1);
            const auto p = static_cast<Eigen::Index>(keep);
            Eigen::MatrixXd vk = v.leftCols(mc) * y.leftCols(p);
            Eigen::VectorXd next = v.col(mc);
            v.leftCols(p) = vk;
            v.col(p) = next;
            h.setZero();
            for (Eigen::Index i = 0; i < p; ++i) {
                h(i, i) = theta[i];
                h(p, i) = beta * y(mc - 1, i);
            }
            start = keep;
        }
    }

private:
    bool random_orthogonal(Eigen::MatrixXd& v, std::size_t col, const Eigen::MatrixXd& q) {
        const auto c = static_cast<Eigen::Index>(col);
        for (int attempt = 0; attempt < 3; ++attempt) {
            Eigen::VectorXd x(v.rows());
            for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = active_[static_cast<std::size_t>(i)] ? rng_.uniform() - 0.5 : 0.0;
            const double n0 = x.norm();
            for (int pass = 0; pass < 2; ++pass) {
                if (c > 0) x.noalias() -= v.leftCols(c) * (v.leftCols(c).transpose() * x);
                if (q.cols() > 0) x.noalias() -= q * (q.transpose() * x);
            }
            const double n1 = x.norm();
            if (n1 > 1e-8 * n0) {
                v.col(c) = x / n1;
                return true;
            }
        }
        return false;
    }

    const SparseSymOperator& op_;
    const std::vector<char>& active_;
    std::size_t active_count_;
    CounterRng& rng_;
};

Eigen::VectorXd map_back(const SparseSymOperator& op, const Eigen::VectorXd& u) {
    Eigen::VectorXd v(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double d = op.degree(static_cast<std::size_t>(i));
        v[i] = d > 0.0 ? u[i] / std::sqrt(d) : 0.0;
    }
    const double nv = v.norm();
    if (nv > 0.0) v /= nv;
    fix_sign(v);
    return v;
}

Spectrum finish(const SparseSymOperator& op, const std::vector<double>& theta, const Eigen::MatrixXd& u) {
    Spectrum s;
    s.values = theta;
    s.vectors.resize(u.rows(), u.cols());
    s.residuals.resize(theta.size());
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        s.vectors.col(c) = map_back(op, u.col(c));
        s.residuals[static_cast<std::size_t>(c)] =
            (op.apply(s.vectors.col(c)) - theta[static_cast<std::size_t>(c)] * s.vectors.col(c)).norm();
    }
    return s;
}

}  // namespace

Spectrum eigs_smallest_magnitude(const SparseSymOperator& op, std::size_t k, const EigsOptions& opts) {
    const std::size_t n = op.n();
    if (k < 1 || k > n) throw InputError("eigs_smallest_magnitude: need 1 <= k <= n");
    if (!(opts.tol > 0.0)) throw InputError("eigs_smallest_magnitude: tol must be positive");
    std::vector<char> active(n);
    std::size_t active_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        active[i] = op.isolated(i) ? 0 : 1;
        active_count += active[i];
    }
    if (k > active_count) throw InputError("eigs_smallest_magnitude: k exceeds the number of non-isolated vertices");

    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        dmin = std::min(dmin, op.degree(i));
        dmax = std::max(dmax, op.degree(i));
    }
    // Residuals of the similarity transform grow by at most sqrt(dmax/dmin) when mapped back.
    double inner_tol = 0.25 * opts.tol / std::sqrt(dmax / dmin);
    const std::size_t basis = opts.basis_size ? opts.basis_size : std::max<std::size_t>(2 * k + 40, 120);
    std::size_t budget = opts.max_matvecs ? opts.max_matvecs : std::max<std::size_t>(20000, 40 * n);

    CounterRng rng(opts.seed);
    KrylovSchur ks(op, active, active_count, rng);

    for (int attempt = 0; attempt < 3; ++attempt) {
        const Eigen::MatrixXd none(static_cast<Eigen::Index>(n), 0);
        RitzSet found = ks.run(k, none, inner_tol, basis, budget);
        if (!found.converged) {
            throw NumericError("eigs_smallest_magnitude: Lanczos did not converge within the iteration budget", found.resid);
        }
        std::vector<double> theta = found.theta;
        Eigen::MatrixXd u = found.u;

        // Deflated single-vector passes pick up copies of repeated eigenvalues
        // that a single Krylov sequence cannot see.
        for (std::size_t pass = 0; pass < k && static_cast<std::size_t>(u.cols()) < active_count; ++pass) {
            RitzSet extra = ks.run(1, u, inner_tol, basis, budget);
            if (!extra.converged) {
                throw NumericError("eigs_smallest_magnitude: deflation pass did not converge", extra.resid);
            }
            if (!(extra.theta[0] > theta[k - 1] + 1e-12)) break;
            auto pos = std::upper_bound(theta.begin(), theta.end(), extra.theta[0], std::greater<double>());
            const auto at = static_cast<Eigen::Index>(pos - theta.begin());
            theta.insert(pos, extra.theta[0]);
            Eigen::MatrixXd grown(u.rows(), u.cols() + 1);
            grown << u.leftCols(at), extra.u.col(0), u.rightCols(u.cols() - at);
            u = std::move(grown);
            // u keeps all vectors so later passes deflate against every one found
        }
        std::vector<double> t_out(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(k));
        Spectrum s = finish(op, t_out, u.leftCols(static_cast<Eigen::Index>(k)));

        // ascending magnitude, stable
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(s.values[a]) < std::abs(s.values[b]);
        });
        Spectrum sorted;
        sorted.vectors.resize(s.vectors.rows(), static_cast<Eigen::Index>(k));
        for (std::size_t c = 0; c < k; ++c) {
            sorted.values.push_back(s.values[order[c]]);
            sorted.residuals.push_back(s.residuals[order[c]]);
            sorted.vectors.col(static_cast<Eigen::Index>(c)) = s.vectors.col(static_cast<Eigen::Index>(order[c]));
        }
        const double worst = *std::max_element(sorted.residuals.begin(), sorted.residuals.end());
        if (worst <= opts.tol) return sorted;
        if (attempt == 2) throw NumericError("eigs_smallest_magnitude: residuals above tolerance", sorted.residuals);
        inner_tol *= 1e-2;
    }
    throw NumericError("eigs_smallest_magnitude: unreachable");
}

Spectrum eigh_operator(const SparseSymOperator& op) {
    const std::size_t n = op.n();
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (!op.isolated(i)) idx.push_back(static_cast<Eigen::Index>(i));
    }
    if (idx.empty()) throw InputError("eigh_operator: operator has no non-isolated vertices");
    const Eigen::MatrixXd full = op.dense_symmetric();
    const auto r = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(r, r);
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < r; ++b) sub(a, b) = full(idx[a], idx[b]);
    Spectrum ds = eigh_dense(DenseSymMatrix(std::move(sub)));
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), r);
    for (Eigen::Index a = 0; a < r; ++a) u.row(idx[a]) = ds.vectors.row(a);
    return finish(op, ds.values, u);
}

PolyFit polyfit_ls(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t degree) {
    if (xs.size() != ys.size()) throw InputError("polyfit_ls: xs and ys differ in length");
    if (xs.size() < degree + 1) throw InputError("polyfit_ls: need at least degree + 1 points");
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    if (distinct < degree + 1) {
        std::ostringstream msg;
        msg << "polyfit_ls: Vandermonde matrix is rank deficient (" << distinct << " distinct x values for degree " << degree << ")";
        throw InputError(msg.str());
    }
    const auto n = static_cast<Eigen::Index>(xs.size());
    const auto p = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd v(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = 1.0;
        for (Eigen::Index c = p - 1; c >= 0; --c) {
            v(i, c) = t;
            t *= xs[static_cast<std::size_t>(i)];
        }
        y[i] = ys[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
    if (qr.rank() < p) throw InputError("polyfit_ls: Vandermonde matrix is numerically rank deficient");
    const Eigen::VectorXd c = qr.solve(y);
    PolyFit fit;
    fit.coeffs.assign(c.data(), c.data() + c.size());
    fit.residual = (v * c - y).norm();
    return fit;
}

double polyval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (double c : coeffs) acc = acc * x + c;
    return acc;
}

Eigen::MatrixXd orthogonal_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() == 0) throw InputError("orthogonal_align: shape mismatch");
    if (a.cwiseAbs().maxCoeff() == 0.0) throw InputError("orthogonal_align: A is identically zero");
    const Eigen::MatrixXd m = a.transpose() * b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv[sv.size() - 1] <= 1e-12 * sv[0]) throw NumericError("orthogonal_align: A^T B is rank deficient");
    return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace eigenlab::linalg
