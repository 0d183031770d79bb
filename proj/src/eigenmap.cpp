#include "eigenlab/eigenmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "eigenlab/error.hpp"

namespace eigenlab::emap {

Eigen::MatrixXd Eigenmap::unit_l2() const {
    Eigen::MatrixXd u = coords;
    for (Eigen::Index d = 0; d < u.cols(); ++d) u.col(d) *= l2_maxabs[static_cast<std::size_t>(d)];
    return u;
}

Eigenmap build_eigenmap(const linalg::SparseSymOperator& op, std::size_t dims, const EigenmapOptions& opts) {
    if (dims < 1) throw InputError("build_eigenmap: D must be at least 1");
    const std::size_t active = op.n() - op.isolated_count();
    if (active < dims + 1)
        throw InputError("build_eigenmap: operator has " + std::to_string(active) + " non-isolated vertices, need at least " +
                         std::to_string(dims + 1));
    linalg::EigsOptions eo;
    eo.tol = opts.tol;
    eo.seed = opts.seed;

    std::size_t k = dims + 1;
    linalg::Spectrum sp;
    std::vector<std::size_t> keep;
    std::size_t zeros = 0;
    while (true) {
        sp = linalg::eigs_smallest_magnitude(op, k, eo);
        keep.clear();
        zeros = 0;
        for (std::size_t i = 0; i < sp.size(); ++i) {
            if (std::abs(sp.values[i]) < 1e-10) ++zeros;
            else keep.push_back(i);
        }
        if (keep.size() >= dims) break;
        const std::size_t want = dims + zeros + (zeros == k ? 1 : 0);
        if (want > active || want <= k)
            throw NumericError("build_eigenmap: fewer than D + 1 converged eigenpairs with nonzero eigenvalue", sp.residuals);
        k = want;
    }
    keep.resize(dims);

    Eigenmap m;
    m.skipped_zero_modes = zeros;
    if (zeros > 1)
        m.warnings.push_back("skipped " + std::to_string(zeros - 1) +
                             " extra zero modes; the graph has several connected components");
    m.coords.resize(static_cast<Eigen::Index>(op.n()), static_cast<Eigen::Index>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
        Eigen::VectorXd v = sp.vectors.col(static_cast<Eigen::Index>(keep[d]));
        v /= v.norm();
        const double peak = v.cwiseAbs().maxCoeff();
        bool signed_by_anchor = false;
        if (opts.anchor) {
            if (*opts.anchor >= op.n()) throw InputError("build_eigenmap: anchor row out of range");
            const double a = v[static_cast<Eigen::Index>(*opts.anchor)];
            if (std::abs(a) >= 1e-3 * peak) {
                if (a < 0) v = -v;
                signed_by_anchor = true;
            }
        }
        if (!signed_by_anchor) linalg::fix_sign(v);
        m.coords.col(static_cast<Eigen::Index>(d)) = v / peak;
        m.eigenvalues.push_back(sp.values[keep[d]]);
        m.l2_maxabs.push_back(peak);
    }
    return m;
}

std::size_t rightmost_point(const spaces::PointSet& pts) {
    if (pts.size() == 0) throw InputError("rightmost_point: empty point set");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts.at(i, 0) > pts.at(best, 0)) best = i;
    return best;
}

linalg::PolyFit fit_polynomial_image(const Eigenmap& map, std::size_t col_x, std::size_t col_y, std::size_t degree) {
    if (degree < 1) throw InputError("fit_polynomial_image: degree must be at least 1");
    if (col_x < 1 || col_x > map.dims() || col_y < 1 || col_y > map.dims())
        throw InputError("fit_polynomial_image: columns are numbered 1.." + std::to_string(map.dims()));
    std::vector<double> xs(map.size()), ys(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        xs[i] = map.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_x - 1));
        ys[i] = map.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_y - 1));
    }
    try {
        return linalg::polyfit_ls(xs, ys, degree);
    } catch (const InputError& e) {
        throw InputError("fit_polynomial_image: column " + std::to_string(col_x) + " is degenerate: " + e.what());
    }
}

namespace {

void check_groups(const std::vector<std::vector<std::size_t>>& groups, std::size_t cols) {
    std::vector<bool> used(cols, false);
    for (const auto& g : groups) {
        if (g.empty()) throw InputError("alignment group must not be empty");
        for (std::size_t c : g) {
            if (c < 1 || c > cols) throw InputError("alignment column " + std::to_string(c) + " out of range");
            if (used[c - 1]) throw InputError("alignment groups overlap at column " + std::to_string(c));
            used[c - 1] = true;
        }
    }
}

Eigen::MatrixXd take(const Eigen::MatrixXd& m, const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j] - 1));
    return out;
}

}  // namespace

Alignment align_columns(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::vector<std::vector<std::size_t>>& groups) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InputError("align: matrices must have the same shape");
    check_groups(groups, static_cast<std::size_t>(a.cols()));
    Alignment out;
    out.aligned = b;
    double before = 0.0, after = 0.0;
    std::size_t entries = 0;
    for (const auto& g : groups) {
        const Eigen::MatrixXd ga = take(a, g), gb = take(b, g);
        // R minimises ||gb R - ga||
        const Eigen::MatrixXd r = linalg::orthogonal_align(gb, ga);
        const Eigen::MatrixXd rotated = gb * r;
        for (std::size_t j = 0; j < g.size(); ++j) out.aligned.col(static_cast<Eigen::Index>(g[j] - 1)) = rotated.col(static_cast<Eigen::Index>(j));
        before += (gb - ga).squaredNorm();
        after += (rotated - ga).squaredNorm();
        entries += static_cast<std::size_t>(ga.size());
        const bool reflect = r.determinant() < 0;
        double angle = 0.0;
        if (g.size() == 2) {
            angle = std::atan2(r(1, 0), r(0, 0));
            if (angle <= -std::numbers::pi) angle = std::numbers::pi;
        }
        out.transforms.push_back(r);
        out.angles.push_back(angle);
        out.reflections.push_back(reflect);
    }
    if (entries > 0) {
        out.rms_before = std::sqrt(before / static_cast<double>(entries));
        out.rms_after = std::sqrt(after / static_cast<double>(entries));
    }
    return out;
}

Alignment align_eigenmaps(const Eigenmap& a, const Eigenmap& b, const std::vector<std::vector<std::size_t>>& groups) {
    if (a.dims() != b.dims() || a.size() != b.size()) throw InputError("align_eigenmaps: eigenmaps must have the same shape");
    check_groups(groups, a.dims());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (std::size_t c : groups[gi]) {
            const double la = a.eigenvalues[c - 1], lb = b.eigenvalues[c - 1];
            if (std::abs(la - lb) > 0.05 * std::max(std::abs(la), std::abs(lb))) {
                std::ostringstream msg;
                msg << "align_eigenmaps: group " << gi + 1 << " eigenvalues differ by more than 5% (" << la << " vs " << lb
                    << " at column " << c << ")";
                throw InputError(msg.str());
            }
        }
    }
    return align_columns(a.coords, b.coords, groups);
}

void write_csv(std::ostream& os, const Eigenmap& map, const spaces::PointSet& pts) {
    if (pts.size() != map.size()) throw InputError("eigenmap CSV: point count does not match the eigenmap rows");
    os << "point_index";
    for (int c = 0; c < pts.dim; ++c) os << ",x" << c + 1;
    for (std::size_t d = 0; d < map.dims(); ++d) os << ",phi_" << d + 1;
    for (std::size_t d = 0; d < map.dims(); ++d) os << ",lambda_" << d + 1;
    os << '\n';
    std::ostringstream line;
    line.imbue(std::locale::classic());
    line.precision(17);
    for (std::size_t i = 0; i < map.size(); ++i) {
        line.str("");
        line << i;
        for (int c = 0; c < pts.dim; ++c) line << ',' << pts.at(i, c);
        for (std::size_t d = 0; d < map.dims(); ++d) line << ',' << map.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
        for (std::size_t d = 0; d < map.dims(); ++d) line << ',' << map.eigenvalues[d];
        os << line.str() << '\n';
    }
}

namespace {

std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t p = s.find(',', start);
        out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

double number(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw InputError("eigenmap CSV line " + std::to_string(line) + ": cannot parse '" + std::string(s) + "'");
    return v;
}

}  // namespace

EigenmapTable read_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw InputError("eigenmap CSV: missing header");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const auto names = split(header);
    if (names.empty() || names[0] != "point_index") throw InputError("eigenmap CSV: header must start with point_index");
    int dim = 0;
    std::size_t dims = 0, lambdas = 0;
    for (std::size_t c = 1; c < names.size(); ++c) {
        if (names[c].starts_with("x")) ++dim;
        else if (names[c].starts_with("phi_")) ++dims;
        else if (names[c].starts_with("lambda_")) ++lambdas;
        else throw InputError("eigenmap CSV: unexpected column '" + std::string(names[c]) + "'");
    }
    if (dims == 0 || lambdas != dims) throw InputError("eigenmap CSV: need matching phi_ and lambda_ columns");
    EigenmapTable t;
    t.points.dim = dim;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != names.size()) throw InputError("eigenmap CSV line " + std::to_string(lineno) + ": wrong column count");
        std::vector<double> r;
        for (std::size_t c = 1; c < cells.size(); ++c) r.push_back(number(cells[c], lineno));
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw InputError("eigenmap CSV: no data rows");
    t.map.coords.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dims));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < dim; ++c) t.points.coords.push_back(rows[i][static_cast<std::size_t>(c)]);
        for (std::size_t d = 0; d < dims; ++d)
            t.map.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][static_cast<std::size_t>(dim) + d];
    }
    for (std::size_t d = 0; d < dims; ++d) t.map.eigenvalues.push_back(rows[0][static_cast<std::size_t>(dim) + dims + d]);
    t.map.l2_maxabs.assign(dims, 1.0);
    return t;
}

}  // namespace eigenlab::emap
