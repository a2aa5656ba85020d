// hyperfine_stats.hpp — first-principles hyperfine site table: parsing,
// multiplicity-weighted census, and isotope-placement Monte Carlo.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinreg/util.hpp"

namespace spinreg {

// One lattice site (or mirror pair). Sites off the defect mirror plane carry
// two A_xz values (left/right) and multiplicity 2.
struct SiteRecord {
    std::string label;
    std::optional<double> distance_angstrom; // > 0 when known
    double a_zz_mhz = 0.0;
    double a_xz_left_mhz = 0.0;
    std::optional<double> a_xz_right_mhz;

    int multiplicity() const { return a_xz_right_mhz ? 2 : 1; }
};

struct SiteTable {
    std::vector<SiteRecord> records;
    std::string provenance;

    void validate() const; // unique labels, positive distances where known
};

// CSV with header label,distance_a,a_zz_mhz,a_xz_left_mhz,a_xz_right_mhz.
// An empty a_xz_right field means an in-plane site (multiplicity 1); an empty
// distance field means unknown. Malformed rows name their line number.
SiteTable load_table(const std::string& csv_text, const std::string& provenance = "");
SiteTable load_table_file(const std::string& path);
std::string table_to_csv(const SiteTable& table);

// Multiplicity-weighted count of sites with |A_zz| above the threshold.
int count_sites_above(const SiteTable& table, double threshold_mhz);

// count_sites_above * abundance.
double expected_strong_count(const SiteTable& table, double threshold_mhz,
                             double abundance = 0.0467);

struct RegisterMonteCarlo {
    std::vector<std::int64_t> histogram; // histogram[k] = samples with k strong sites
    double p_at_least_one = 0.0;
    double p_at_least_one_analytic = 0.0; // 1 - (1 - abundance)^count
    double mean_count = 0.0;
    // |A_zz| (MHz) of every occupied strong site across samples, bucketed in
    // 1 MHz bins keyed by floor(|A_zz|)
    std::vector<std::pair<int, std::int64_t>> azz_bins;
};

// Independently populates every multiplicity-expanded site with the isotope
// at the given abundance and counts sites above the threshold.
RegisterMonteCarlo monte_carlo_register(const SiteTable& table, double threshold_mhz,
                                        double abundance, std::int64_t n_samples,
                                        std::uint64_t seed);

} // namespace spinreg
