#include "spinreg/readout.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace spinreg {

void ReadoutModel::validate() const {
    auto prob = [](double p, const char* who) {
        if (!(p >= 0 && p <= 1)) throw ConfigError(std::string(who) + " must lie in [0, 1]");
    };
    prob(p_e_flip_per_cycle, "p_e_flip_per_cycle");
    prob(p_n_flip_per_cycle, "p_n_flip_per_cycle");
    if (!(photons_per_cycle >= 0)) throw ConfigError("photons_per_cycle must be >= 0");
    if (!(background_per_cycle >= 0)) throw ConfigError("background_per_cycle must be >= 0");
    if (n_repetitions < 1) throw ConfigError("n_repetitions must be >= 1");
    if (!(cycle_time_us > 0)) throw ConfigError("cycle_time_us must be > 0");
}

int ReadoutRecord::total(int first_n) const {
    int s = 0;
    for (int c = 0; c < first_n && c < int(counts.size()); ++c) s += counts[c];
    return s;
}

std::string nuclear_label(int idx, int n_nuclei) {
    std::string out;
    for (int k = 0; k < n_nuclei; ++k) {
        const int state = (idx >> (n_nuclei - 1 - k)) & 1;
        out += state == 0 ? "⇑" : "⇓";
    }
    return out;
}

int nuclear_index_up_up() { return 0; }

int nuclear_index(const std::string& arrows) {
    int idx = 0;
    int n = 0;
    for (std::size_t pos = 0; pos + 2 < arrows.size() + 1; pos += 3, ++n) {
        const std::string c = arrows.substr(pos, 3);
        idx <<= 1;
        if (c == "⇓")
            idx |= 1;
        else if (c != "⇑")
            throw ConfigError("bad nuclear label '" + arrows + "'");
    }
    return idx;
}

std::vector<double> nuclear_populations(const Matrix& rho, const std::vector<Level>& levels,
                                        int n_nuclei) {
    const int nuc_dim = 1 << n_nuclei;
    const int dim = int(levels.size());
    std::vector<double> pops(std::size_t(nuc_dim), 0.0);
    for (int l = 0; l < dim; ++l) {
        const double p = std::real(rho(l, l));
        // weight each level by its basis-state decomposition
        for (int b = 0; b < dim; ++b) {
            const double w = std::norm(levels[std::size_t(l)].vec(b));
            if (w == 0) continue;
            pops[std::size_t(b & (nuc_dim - 1))] += p * w;
        }
    }
    return pops;
}

namespace {

// Scramble a nuclear configuration: each spin flips independently with
// probability p. Returns the new configuration index.
int scramble(std::mt19937_64& rng, std::uniform_real_distribution<double>& uni, int idx,
             int n_nuclei, double p) {
    for (int k = 0; k < n_nuclei; ++k)
        if (uni(rng) < p) idx ^= 1 << k;
    return idx;
}

} // namespace

std::vector<ReadoutRecord> simulate_readout(const std::vector<double>& nuclear_pops,
                                            int target_nuclear_state, const ReadoutModel& model,
                                            int n_shots, std::uint64_t seed, int n_cycles) {
    model.validate();
    if (n_cycles <= 0) n_cycles = model.n_repetitions;
    const int nuc_dim = int(nuclear_pops.size());
    int n_nuclei = 0;
    while ((1 << n_nuclei) < nuc_dim) ++n_nuclei;
    if (target_nuclear_state < 0 || target_nuclear_state >= nuc_dim)
        throw ConfigError("simulate_readout: target state out of range");

    std::vector<ReadoutRecord> records;
    records.reserve(std::size_t(n_shots));
    for (int shot = 0; shot < n_shots; ++shot) {
        std::mt19937_64 rng = make_rng(derive_seed(seed, std::uint64_t(shot)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        // sample the prepared nuclear configuration
        double r = uni(rng);
        int nuc = nuc_dim - 1;
        for (int b = 0; b < nuc_dim; ++b) {
            if (r < nuclear_pops[std::size_t(b)]) {
                nuc = b;
                break;
            }
            r -= nuclear_pops[std::size_t(b)];
        }

        ReadoutRecord rec;
        rec.shot = shot;
        rec.prepared_label = nuclear_label(target_nuclear_state, n_nuclei);
        rec.counts.resize(std::size_t(n_cycles), 0);
        for (int c = 0; c < n_cycles; ++c) {
            int counts = 0;
            if (nuc == target_nuclear_state && model.photons_per_cycle > 0) {
                // bright: CnNOT puts the electron in the cycling manifold
                double mean = model.photons_per_cycle;
                if (uni(rng) < model.p_e_flip_per_cycle) mean *= uni(rng); // early pump truncation
                counts += std::poisson_distribution<int>(mean)(rng);
                nuc = scramble(rng, uni, nuc, n_nuclei, model.p_n_flip_per_cycle);
            }
            if (model.background_per_cycle > 0)
                counts += std::poisson_distribution<int>(model.background_per_cycle)(rng);
            rec.counts[std::size_t(c)] = counts;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ReadoutRecord> simulate_background(const ReadoutModel& model, int n_shots,
                                               std::uint64_t seed, int n_cycles) {
    model.validate();
    if (n_cycles <= 0) n_cycles = model.n_repetitions;
    std::vector<ReadoutRecord> records;
    records.reserve(std::size_t(n_shots));
    for (int shot = 0; shot < n_shots; ++shot) {
        std::mt19937_64 rng = make_rng(derive_seed(seed ^ 0xb6cfULL, std::uint64_t(shot)));
        ReadoutRecord rec;
        rec.shot = shot;
        rec.prepared_label = "background";
        rec.counts.resize(std::size_t(n_cycles), 0);
        for (int c = 0; c < n_cycles; ++c)
            rec.counts[std::size_t(c)] =
                model.background_per_cycle > 0
                    ? std::poisson_distribution<int>(model.background_per_cycle)(rng)
                    : 0;
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

double mean_total(const std::vector<ReadoutRecord>& records, int first_n) {
    if (records.empty()) throw EstimationError("estimate_populations: empty record set");
    KahanSum s;
    for (const auto& r : records) s.add(double(r.total(first_n)));
    return s.value() / double(records.size());
}

} // namespace

NuclearPopulations estimate_populations(const std::vector<ReadoutRecord>& up_up,
                                        const std::vector<ReadoutRecord>& up_down,
                                        const std::vector<ReadoutRecord>& down_up,
                                        const std::vector<ReadoutRecord>& down_down,
                                        const std::vector<ReadoutRecord>& background,
                                        const ReadoutModel& model) {
    const int n = model.n_repetitions;
    const double bg = mean_total(background, n);
    double pl[4] = {mean_total(up_up, n) - bg, mean_total(up_down, n) - bg,
                    mean_total(down_up, n) - bg, mean_total(down_down, n) - bg};
    NuclearPopulations out;
    for (double& v : pl)
        if (v < 0) {
            v = 0;
            out.clamped = true;
        }
    const double total = pl[0] + pl[1] + pl[2] + pl[3];
    if (total <= 0) throw EstimationError("estimate_populations: total signal is zero");
    out.up_up = pl[0] / total;
    out.up_down = pl[1] / total;
    out.down_up = pl[2] / total;
    out.down_down = pl[3] / total;
    return out;
}

double nuclear_expectation(const NuclearPopulations& p) {
    return (p.up_up + p.up_down) - (p.down_up + p.down_down);
}

Matrix apply_laser_pump(const Matrix& rho, const std::vector<Level>& levels, char transition,
                        double duration_us, const ReadoutModel& model) {
    model.validate();
    if (transition != 'B' && transition != 'C')
        throw ConfigError("laser transition must be B or C");
    const int dim = int(levels.size());
    const int n_sites = int(std::lround(std::log2(double(dim))));
    const int n_nuclei = n_sites - 1;
    const int cycles = std::max(1, int(std::lround(duration_us / model.cycle_time_us)));

    // bright manifold: C cycles the ↑ manifold and pumps to ↓; B is the mirror
    const int bright_e = (transition == 'C') ? 0 : 1;

    auto level_bits = [&](int l) {
        // dominant basis state of the level (levels are near-product states)
        int arg = 0;
        double best = -1;
        for (int b = 0; b < dim; ++b) {
            const double m = std::norm(levels[std::size_t(l)].vec(b));
            if (m > best) {
                best = m;
                arg = b;
            }
        }
        return arg;
    };

    std::vector<int> bits(static_cast<std::size_t>(dim), 0);
    std::vector<int> level_of_bits(static_cast<std::size_t>(dim), -1);
    for (int l = 0; l < dim; ++l) {
        bits[std::size_t(l)] = level_bits(l);
        level_of_bits[std::size_t(bits[std::size_t(l)])] = l;
    }

    // one-cycle Markov matrix on level populations
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(dim, dim);
    const double p_e = model.p_e_flip_per_cycle;
    const double p_n = model.p_n_flip_per_cycle;
    for (int l = 0; l < dim; ++l) {
        const int b = bits[std::size_t(l)];
        const int e = (b >> n_nuclei) & 1;
        if (e != bright_e) {
            step(l, l) = 1.0; // dark, untouched
            continue;
        }
        const int nuc = b & ((1 << n_nuclei) - 1);
        for (int nuc2 = 0; nuc2 < (1 << n_nuclei); ++nuc2) {
            double w = 1.0;
            for (int k = 0; k < n_nuclei; ++k)
                w *= (((nuc ^ nuc2) >> k) & 1) ? p_n : (1.0 - p_n);
            const int stay_bits = (e << n_nuclei) | nuc2;
            const int pump_bits = ((1 - e) << n_nuclei) | nuc2;
            step(level_of_bits[std::size_t(stay_bits)], l) += w * (1.0 - p_e);
            step(level_of_bits[std::size_t(pump_bits)], l) += w * p_e;
        }
    }

    Eigen::VectorXd pops(dim);
    for (int l = 0; l < dim; ++l) pops(l) = std::real(rho(l, l));
    for (int c = 0; c < cycles; ++c) pops = step * pops;

    Matrix out = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const bool i_dark = ((bits[std::size_t(i)] >> n_nuclei) & 1) != bright_e;
        out(i, i) = pops(i);
        for (int j = 0; j < dim; ++j) {
            if (i == j) continue;
            const bool j_dark = ((bits[std::size_t(j)] >> n_nuclei) & 1) != bright_e;
            if (i_dark && j_dark) out(i, j) = rho(i, j); // dark-dark coherences survive
        }
    }
    return out;
}

std::string records_to_csv(const std::vector<ReadoutRecord>& records) {
    std::ostringstream os;
    os << "shot,cycle,counts,state\n";
    for (const auto& r : records)
        for (std::size_t c = 0; c < r.counts.size(); ++c)
            os << r.shot << ',' << c << ',' << r.counts[c] << ',' << r.prepared_label << '\n';
    return os.str();
}

std::string histogram_to_csv(const std::vector<ReadoutRecord>& records, int first_n) {
    std::vector<std::size_t> freq;
    for (const auto& r : records) {
        const int t = r.total(first_n);
        if (std::size_t(t) >= freq.size()) freq.resize(std::size_t(t) + 1, 0);
        ++freq[std::size_t(t)];
    }
    std::ostringstream os;
    os << "counts_bin,frequency\n";
    for (std::size_t b = 0; b < freq.size(); ++b) os << b << ',' << freq[b] << '\n';
    return os.str();
}

} // namespace spinreg
