#ifndef SEQSTEP_REPORT_HPP
#define SEQSTEP_REPORT_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqstep/simulation.hpp"

namespace seqstep {

// One line of a comparison block: a sequential report or a fixed baseline.
struct ReportRow {
    std::string procedure;
    double e_n = 0.0;
    std::optional<double> se;
    double typeI = 0.0;
    double typeII = 0.0;
    std::optional<long> savings;  // percent, sequential rows only
};

ReportRow to_row(const SimulationReport& report);

// CSV columns: scenario,procedure,E_N,SE,typeI,typeII,savings
void write_report_csv(std::ostream& os, const std::string& scenario_label,
                      const std::vector<ReportRow>& rows);

// Fixed-width table; E_N printed with 2 decimals, rates with 3.
void write_report_table(std::ostream& os, const std::string& scenario_label,
                        const std::vector<ReportRow>& rows);

// j, stepdown alpha_j, stepup alpha_j
void write_step_values_csv(std::ostream& os, const std::vector<double>& stepdown,
                           const std::vector<double>& stepup);

}  // namespace seqstep

#endif
