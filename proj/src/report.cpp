#include "seqstep/report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace seqstep {

namespace {

std::string fixed_str(double x, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << x;
    return os.str();
}

}  // namespace

ReportRow to_row(const SimulationReport& report) {
    ReportRow row;
    row.procedure = report.procedure_name;
    row.e_n = report.e_n;
    row.se = report.se;
    row.typeI = report.typeI_rate;
    row.typeII = report.typeII_rate;
    return row;
}

void write_report_csv(std::ostream& os, const std::string& scenario_label,
                      const std::vector<ReportRow>& rows) {
    os << "scenario,procedure,E_N,SE,typeI,typeII,savings\n";
    for (const auto& r : rows) {
        os << scenario_label << ',' << r.procedure << ',' << fixed_str(r.e_n, 2) << ',';
        if (r.se) os << fixed_str(*r.se, 2);
        os << ',' << fixed_str(r.typeI, 3) << ',' << fixed_str(r.typeII, 3) << ',';
        if (r.savings) os << *r.savings << '%';
        os << '\n';
    }
}

void write_report_table(std::ostream& os, const std::string& scenario_label,
                        const std::vector<ReportRow>& rows) {
    os << scenario_label << "\n";
    os << std::left << std::setw(24) << "procedure" << std::right << std::setw(10) << "E_N"
       << std::setw(8) << "SE" << std::setw(9) << "typeI" << std::setw(9) << "typeII"
       << std::setw(10) << "savings" << "\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(24) << r.procedure << std::right << std::setw(10)
           << fixed_str(r.e_n, 2) << std::setw(8) << (r.se ? fixed_str(*r.se, 2) : "")
           << std::setw(9) << fixed_str(r.typeI, 3) << std::setw(9) << fixed_str(r.typeII, 3)
           << std::setw(10) << (r.savings ? std::to_string(*r.savings) + "%" : "") << "\n";
    }
}

void write_step_values_csv(std::ostream& os, const std::vector<double>& stepdown,
                           const std::vector<double>& stepup) {
    if (stepdown.size() != stepup.size())
        throw std::invalid_argument("write_step_values_csv: length mismatch");
    os << "j,stepdown_alpha,stepup_alpha\n";
    os << std::setprecision(12);
    for (std::size_t j = 0; j < stepdown.size(); ++j)
        os << (j + 1) << ',' << stepdown[j] << ',' << stepup[j] << '\n';
}

}  // namespace seqstep
