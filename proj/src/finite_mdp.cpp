#include "simrel/finite_mdp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "simrel/errors.hpp"
#include "simrel/numerics.hpp"
#include "simrel/parallel.hpp"
#include "simrel/rng.hpp"

namespace simrel {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

bool is_zero_matrix(const Mat& R) {
    return R.size() == 0 || R.cwiseAbs().maxCoeff() == 0.0;
}

bool is_diagonal(const Mat& S) {
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = 0; j < S.cols(); ++j)
            if (i != j && std::abs(S(i, j)) > 1e-14 * scale) return false;
    return true;
}

}  // namespace

double FiniteMdp::prob(long s, int w, int u, long t) const {
    if (s == sink_state()) return (t == sink_state()) ? 1.0 : 0.0;
    return tensor[row_offset(s, w, u) + static_cast<std::size_t>(t)];
}

std::size_t FiniteMdp::row_offset(long s, int w, int u) const {
    if (s < 0 || s >= n_states() || w < 0 || w >= n_w() || u < 0 || u >= n_nu())
        throw DimensionError("tensor index out of range");
    const std::size_t row_len = static_cast<std::size_t>(n_states() + 1);
    return ((static_cast<std::size_t>(s) * static_cast<std::size_t>(n_w()) +
             static_cast<std::size_t>(w)) *
                static_cast<std::size_t>(n_nu()) +
            static_cast<std::size_t>(u)) *
           row_len;
}

Vec FiniteMdp::output_of(long s) const {
    if (s == sink_state()) throw PrerequisiteError("sink state has no output");
    return C_out * partition.representative(s);
}

TransitionRowResult transition_row(const NonlinearSystemTuple& absr, const GridPartition& part,
                                   const Vec& xhat_rep, const Vec& what, const Vec& nuhat,
                                   std::uint64_t seed, int mc_samples) {
    const int d = part.dim();
    if (absr.n() != d) throw DimensionError("reduced state dimension does not match grid");
    const double arg = (absr.F * xhat_rep)(0);
    Vec mean = absr.A * xhat_rep + absr.E * absr.phi.eval(arg);
    if (absr.p() > 0) mean += absr.D * what;
    if (absr.m() > 0) mean += absr.B * nuhat;

    const long n_cells = part.cell_total();
    TransitionRowResult out;
    out.probs.assign(static_cast<std::size_t>(n_cells) + 1, 0.0);

    if (is_zero_matrix(absr.R)) {
        // Dirac transition: unit mass on the cell containing the mean.
        const long cell = part.cell_of(mean);
        out.probs[static_cast<std::size_t>(cell)] = 1.0;
        out.exact = true;
        return out;
    }

    const Mat cov = absr.R * absr.R.transpose();
    if (is_diagonal(cov)) {
        // Exact integration: per-dimension normal CDF differences at the grid
        // lines, combined as a product over dimensions.
        std::vector<std::vector<double>> dim_probs(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            const int cnt = part.counts[static_cast<std::size_t>(k)];
            std::vector<double>& pk = dim_probs[static_cast<std::size_t>(k)];
            pk.assign(static_cast<std::size_t>(cnt), 0.0);
            const double sigma = std::sqrt(std::max(0.0, cov(k, k)));
            const double lo = part.lower[static_cast<std::size_t>(k)];
            const double wk = part.widths[static_cast<std::size_t>(k)];
            if (sigma == 0.0) {
                // Deterministic coordinate: indicator of the mean's cell.
                const double v = mean[k];
                if (v >= lo && v <= part.upper[static_cast<std::size_t>(k)]) {
                    long idx = static_cast<long>(std::floor((v - lo) / wk));
                    if (idx >= cnt) idx = cnt - 1;
                    pk[static_cast<std::size_t>(idx)] = 1.0;
                }
            } else {
                double prev = normal_cdf((lo - mean[k]) / sigma);
                for (int c = 0; c < cnt; ++c) {
                    const double edge = lo + (c + 1) * wk;
                    const double cur = normal_cdf((edge - mean[k]) / sigma);
                    pk[static_cast<std::size_t>(c)] = std::max(0.0, cur - prev);
                    prev = cur;
                }
            }
        }
        double total = 0.0;
        for (long cell = 0; cell < n_cells; ++cell) {
            const std::vector<long> mi = part.multi_index(cell);
            double p = 1.0;
            for (int k = 0; k < d; ++k)
                p *= dim_probs[static_cast<std::size_t>(k)][static_cast<std::size_t>(mi[static_cast<std::size_t>(k)])];
            out.probs[static_cast<std::size_t>(cell)] = p;
            total += p;
        }
        out.probs[static_cast<std::size_t>(n_cells)] = std::max(0.0, 1.0 - total);
        out.exact = true;
        return out;
    }

    // Correlated covariance: seeded Monte Carlo fallback with reported
    // standard error.
    NoiseSource src(seed, /*stream_id=*/0, absr.s());
    std::vector<long> counts(static_cast<std::size_t>(n_cells) + 1, 0);
    for (int i = 0; i < mc_samples; ++i) {
        const Vec x = mean + absr.R * src.draw();
        ++counts[static_cast<std::size_t>(part.cell_of(x))];
    }
    double max_se = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const double p = static_cast<double>(counts[c]) / mc_samples;
        out.probs[c] = p;
        max_se = std::max(max_se, std::sqrt(p * (1.0 - p) / mc_samples));
    }
    out.exact = false;
    out.standard_error = max_se;
    return out;
}

FiniteMdp build_finite_mdp(const NonlinearSystemTuple& absr, const GridPartition& part,
                           const std::vector<Vec>& w_reps, const std::vector<Vec>& nu_reps,
                           const Vec& x0, const MdpBuildOptions& opts) {
    absr.validate();
    if (w_reps.empty() || nu_reps.empty())
        throw PrerequisiteError("input representative lists must be nonempty");
    for (const Vec& w : w_reps)
        if (w.size() != absr.p()) throw DimensionError("internal-input representative dimension");
    for (const Vec& nu : nu_reps)
        if (nu.size() != absr.m()) throw DimensionError("external-input representative dimension");

    FiniteMdp mdp;
    mdp.partition = part;
    mdp.w_reps = w_reps;
    mdp.nu_reps = nu_reps;
    mdp.C_out = absr.C;

    const long S = mdp.n_states();
    const std::size_t n_rows = static_cast<std::size_t>(S) * w_reps.size() * nu_reps.size();
    const std::size_t bytes = n_rows * static_cast<std::size_t>(S + 1) * sizeof(double);
    if (bytes > opts.memory_cap_bytes) {
        throw ResourceError("transition tensor estimate " + std::to_string(bytes) +
                            " bytes exceeds cap " + std::to_string(opts.memory_cap_bytes) +
                            " bytes");
    }
    mdp.tensor.assign(n_rows * static_cast<std::size_t>(S + 1), 0.0);
    mdp.initial_state = part.cell_of(x0);

    const int W = mdp.n_w();
    const int U = mdp.n_nu();
    parallel_for_static(n_rows, opts.threads, [&](std::size_t row) {
        const long s = static_cast<long>(row / (static_cast<std::size_t>(W) * U));
        const std::size_t rem = row % (static_cast<std::size_t>(W) * U);
        const int w = static_cast<int>(rem / U);
        const int u = static_cast<int>(rem % U);
        const std::uint64_t row_seed = NoiseSource::derive(opts.seed, row);
        const TransitionRowResult r =
            transition_row(absr, part, part.representative(s),
                           w_reps[static_cast<std::size_t>(w)],
                           nu_reps[static_cast<std::size_t>(u)], row_seed, opts.mc_samples);
        const std::size_t off = mdp.row_offset(s, w, u);
        for (std::size_t t = 0; t < r.probs.size(); ++t) mdp.tensor[off + t] = r.probs[t];
    });

    // Stochasticity audit.
    for (long s = 0; s < S; ++s)
        for (int w = 0; w < W; ++w)
            for (int u = 0; u < U; ++u) {
                const std::size_t off = mdp.row_offset(s, w, u);
                double sum = 0.0;
                for (long t = 0; t <= S; ++t) sum += mdp.tensor[off + static_cast<std::size_t>(t)];
                if (std::abs(sum - 1.0) > 1e-9)
                    throw Error("transition row (" + std::to_string(s) + "," +
                                std::to_string(w) + "," + std::to_string(u) +
                                ") sums to " + fmt17(sum));
            }
    return mdp;
}

namespace {

void write_vector_line(std::ostream& os, const char* key, const std::vector<double>& v) {
    os << key;
    for (double x : v) os << ' ' << fmt17(x);
    os << '\n';
}

std::vector<double> parse_doubles(std::istringstream& iss, std::size_t count,
                                  const std::string& what) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        if (!(iss >> out[i])) throw ParseError("mdp file: truncated " + what + " line");
    return out;
}

}  // namespace

void write_finite_mdp(const FiniteMdp& mdp, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    const int d = mdp.partition.dim();
    os << "simrel-mdp 1\n";
    os << "dim " << d << '\n';
    write_vector_line(os, "lower", mdp.partition.lower);
    write_vector_line(os, "upper", mdp.partition.upper);
    write_vector_line(os, "widths", mdp.partition.widths);
    os << "counts";
    for (int c : mdp.partition.counts) os << ' ' << c;
    os << '\n';
    os << "extended " << (mdp.partition.extended ? 1 : 0) << '\n';
    os << "beta " << fmt17(mdp.partition.beta) << '\n';
    os << "w_reps " << mdp.n_w() << ' ' << (mdp.n_w() ? mdp.w_reps[0].size() : 0) << '\n';
    for (const Vec& w : mdp.w_reps) {
        for (Eigen::Index i = 0; i < w.size(); ++i) os << (i ? " " : "") << fmt17(w[i]);
        os << '\n';
    }
    os << "nu_reps " << mdp.n_nu() << ' ' << (mdp.n_nu() ? mdp.nu_reps[0].size() : 0) << '\n';
    for (const Vec& nu : mdp.nu_reps) {
        for (Eigen::Index i = 0; i < nu.size(); ++i) os << (i ? " " : "") << fmt17(nu[i]);
        os << '\n';
    }
    os << "output " << mdp.C_out.rows() << ' ' << mdp.C_out.cols() << '\n';
    for (Eigen::Index i = 0; i < mdp.C_out.rows(); ++i) {
        for (Eigen::Index j = 0; j < mdp.C_out.cols(); ++j)
            os << (j ? " " : "") << fmt17(mdp.C_out(i, j));
        os << '\n';
    }
    os << "initial " << mdp.initial_state << '\n';
    // Sparse triples: only nonzero probabilities are written.
    std::size_t nnz = 0;
    for (double p : mdp.tensor)
        if (p != 0.0) ++nnz;
    os << "entries " << nnz << '\n';
    const long S = mdp.n_states();
    for (long s = 0; s < S; ++s)
        for (int w = 0; w < mdp.n_w(); ++w)
            for (int u = 0; u < mdp.n_nu(); ++u) {
                const std::size_t off = mdp.row_offset(s, w, u);
                for (long t = 0; t <= S; ++t) {
                    const double p = mdp.tensor[off + static_cast<std::size_t>(t)];
                    if (p != 0.0)
                        os << s << ' ' << w << ' ' << u << ' ' << t << ' ' << fmt17(p) << '\n';
                }
            }
    os << "end\n";
    if (!os) throw Error("write failure on '" + path + "'");
}

FiniteMdp read_finite_mdp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "' for reading");
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(is, line)) throw ParseError(std::string("mdp file: missing ") + what);
        return std::istringstream(line);
    };
    {
        auto iss = next_line("header");
        std::string magic;
        int ver = 0;
        iss >> magic >> ver;
        if (magic != "simrel-mdp" || ver != 1)
            throw ParseError("mdp file: bad header '" + line + "'");
    }
    FiniteMdp mdp;
    int d = 0;
    {
        auto iss = next_line("dim");
        std::string key;
        iss >> key >> d;
        if (key != "dim" || d <= 0) throw ParseError("mdp file: bad dim line");
    }
    auto read_dvec = [&](const char* key) {
        auto iss = next_line(key);
        std::string k;
        iss >> k;
        if (k != key) throw ParseError(std::string("mdp file: expected ") + key);
        return parse_doubles(iss, static_cast<std::size_t>(d), key);
    };
    mdp.partition.lower = read_dvec("lower");
    mdp.partition.upper = read_dvec("upper");
    mdp.partition.widths = read_dvec("widths");
    {
        auto iss = next_line("counts");
        std::string k;
        iss >> k;
        if (k != "counts") throw ParseError("mdp file: expected counts");
        mdp.partition.counts.resize(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            if (!(iss >> mdp.partition.counts[static_cast<std::size_t>(i)]))
                throw ParseError("mdp file: truncated counts line");
    }
    {
        auto iss = next_line("extended");
        std::string k;
        int e = 0;
        iss >> k >> e;
        if (k != "extended") throw ParseError("mdp file: expected extended");
        mdp.partition.extended = (e != 0);
    }
    {
        auto iss = next_line("beta");
        std::string k;
        iss >> k >> mdp.partition.beta;
        if (k != "beta") throw ParseError("mdp file: expected beta");
    }
    auto read_reps = [&](const char* key, std::vector<Vec>& reps) {
        auto iss = next_line(key);
        std::string k;
        int count = 0, dim = 0;
        iss >> k >> count >> dim;
        if (k != key || count <= 0 || dim < 0)
            throw ParseError(std::string("mdp file: bad ") + key + " line");
        reps.resize(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            auto li = next_line(key);
            Vec v(dim);
            for (int j = 0; j < dim; ++j)
                if (!(li >> v[j])) throw ParseError(std::string("mdp file: truncated ") + key);
            reps[static_cast<std::size_t>(i)] = v;
        }
    };
    read_reps("w_reps", mdp.w_reps);
    read_reps("nu_reps", mdp.nu_reps);
    {
        auto iss = next_line("output");
        std::string k;
        int r = 0, c = 0;
        iss >> k >> r >> c;
        if (k != "output" || r < 0 || c < 0) throw ParseError("mdp file: bad output line");
        mdp.C_out.resize(r, c);
        for (int i = 0; i < r; ++i) {
            auto li = next_line("output row");
            for (int j = 0; j < c; ++j)
                if (!(li >> mdp.C_out(i, j))) throw ParseError("mdp file: truncated output row");
        }
    }
    {
        auto iss = next_line("initial");
        std::string k;
        iss >> k >> mdp.initial_state;
        if (k != "initial") throw ParseError("mdp file: expected initial");
    }
    std::size_t entries = 0;
    {
        auto iss = next_line("entries");
        std::string k;
        iss >> k >> entries;
        if (k != "entries") throw ParseError("mdp file: expected entries");
    }
    const long S = mdp.n_states();
    const std::size_t n_rows =
        static_cast<std::size_t>(S) * mdp.w_reps.size() * mdp.nu_reps.size();
    mdp.tensor.assign(n_rows * static_cast<std::size_t>(S + 1), 0.0);
    for (std::size_t e = 0; e < entries; ++e) {
        auto iss = next_line("entry");
        long s = 0, t = 0;
        int w = 0, u = 0;
        double p = 0.0;
        if (!(iss >> s >> w >> u >> t >> p))
            throw ParseError("mdp file: malformed entry at record " + std::to_string(e));
        if (s < 0 || s >= S || t < 0 || t > S)
            throw ParseError("mdp file: entry state out of range at record " + std::to_string(e));
        mdp.tensor[mdp.row_offset(s, w, u) + static_cast<std::size_t>(t)] = p;
    }
    {
        auto iss = next_line("end");
        std::string k;
        iss >> k;
        if (k != "end") throw ParseError("mdp file: missing end marker");
    }
    return mdp;
}

}  // namespace simrel
