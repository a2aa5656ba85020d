#include "spinreg/hyperfine_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace spinreg {

void SiteTable::validate() const {
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (r.label.empty()) throw ConfigError("site table: empty label");
        if (!seen.insert(r.label).second) throw ConfigError("site table: duplicate label '" + r.label + "'");
        if (r.distance_angstrom && !(*r.distance_angstrom > 0))
            throw ConfigError("site '" + r.label + "': distance must be > 0");
        if (!std::isfinite(r.a_zz_mhz)) throw ConfigError("site '" + r.label + "': A_zz not finite");
    }
}

SiteTable load_table(const std::string& csv_text, const std::string& provenance) {
    static const std::string kHeader = "label,distance_a,a_zz_mhz,a_xz_left_mhz,a_xz_right_mhz";
    SiteTable table;
    table.provenance = provenance;
    std::istringstream iss(csv_text);
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(iss, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kHeader)
                throw ConfigError("line " + std::to_string(lineno) + ": expected header '" +
                                  kHeader + "'");
            header_seen = true;
            continue;
        }
        const auto cells = split_char(line, ',');
        if (cells.size() != 5)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 5 fields, got " +
                              std::to_string(cells.size()));
        SiteRecord rec;
        rec.label = trim(cells[0]);
        try {
            if (!trim(cells[1]).empty()) rec.distance_angstrom = parse_double(cells[1]);
            rec.a_zz_mhz = parse_double(cells[2]);
            rec.a_xz_left_mhz = parse_double(cells[3]);
            if (!trim(cells[4]).empty()) rec.a_xz_right_mhz = parse_double(cells[4]);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
        table.records.push_back(std::move(rec));
    }
    table.validate();
    return table;
}

SiteTable load_table_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open site table: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_table(ss.str(), path);
}

std::string table_to_csv(const SiteTable& table) {
    std::ostringstream os;
    os << "label,distance_a,a_zz_mhz,a_xz_left_mhz,a_xz_right_mhz\n";
    for (const auto& r : table.records) {
        os << r.label << ',';
        if (r.distance_angstrom) os << format_double(*r.distance_angstrom);
        os << ',' << format_double(r.a_zz_mhz) << ',' << format_double(r.a_xz_left_mhz) << ',';
        if (r.a_xz_right_mhz) os << format_double(*r.a_xz_right_mhz);
        os << '\n';
    }
    return os.str();
}

int count_sites_above(const SiteTable& table, double threshold_mhz) {
    if (!(threshold_mhz > 0)) throw ConfigError("count_sites_above: threshold must be > 0");
    int count = 0;
    for (const auto& r : table.records)
        if (std::abs(r.a_zz_mhz) > threshold_mhz) count += r.multiplicity();
    return count;
}

double expected_strong_count(const SiteTable& table, double threshold_mhz, double abundance) {
    if (!(abundance >= 0 && abundance <= 1))
        throw ConfigError("expected_strong_count: abundance must lie in [0, 1]");
    return double(count_sites_above(table, threshold_mhz)) * abundance;
}

RegisterMonteCarlo monte_carlo_register(const SiteTable& table, double threshold_mhz,
                                        double abundance, std::int64_t n_samples,
                                        std::uint64_t seed) {
    if (n_samples < 1) throw ConfigError("monte_carlo_register: n_samples must be >= 1");
    if (!(abundance >= 0 && abundance <= 1))
        throw ConfigError("monte_carlo_register: abundance must lie in [0, 1]");

    // multiplicity-expanded strong-site values
    std::vector<double> strong_azz;
    for (const auto& r : table.records)
        if (std::abs(r.a_zz_mhz) > threshold_mhz)
            for (int m = 0; m < r.multiplicity(); ++m) strong_azz.push_back(std::abs(r.a_zz_mhz));

    RegisterMonteCarlo out;
    const int n_sites = int(strong_azz.size());
    out.p_at_least_one_analytic = 1.0 - std::pow(1.0 - abundance, double(n_sites));

    std::map<int, std::int64_t> bins;
    std::int64_t at_least_one = 0;
    KahanSum mean;
    std::vector<std::int64_t> hist(std::size_t(n_sites) + 1, 0);

    for (std::int64_t s = 0; s < n_samples; ++s) {
        std::mt19937_64 rng = make_rng(derive_seed(seed, std::uint64_t(s)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        int count = 0;
        for (int site = 0; site < n_sites; ++site) {
            if (uni(rng) < abundance) {
                ++count;
                ++bins[int(std::floor(strong_azz[std::size_t(site)]))];
            }
        }
        ++hist[std::size_t(count)];
        if (count >= 1) ++at_least_one;
        mean.add(double(count));
    }
    out.histogram = std::move(hist);
    out.p_at_least_one = double(at_least_one) / double(n_samples);
    out.mean_count = mean.value() / double(n_samples);
    out.azz_bins.assign(bins.begin(), bins.end());
    return out;
}

} // namespace spinreg
