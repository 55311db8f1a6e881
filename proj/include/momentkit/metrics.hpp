#pragma once

#include <string>
#include <vector>

namespace momentkit {

// ============================================================================
// Density fields and error norms
// ============================================================================

// Scalar density snapshots on a fixed spatial grid.
struct DensityField {
    std::vector<double> x;                     // sample positions, increasing
    std::vector<double> times;                 // snapshot times, increasing
    std::vector<std::vector<double>> density;  // density[time index][x index]
};

struct ErrorNorms {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

// Relative space-time errors of `candidate` against `reference`. The
// reference is interpolated onto the candidate grid; L1/L2 are trapezoid
// integrals over space and the stored snapshot times; every norm is divided
// by the same norm of the reference.
ErrorNorms space_time_error(const DensityField& reference, const DensityField& candidate);

// Relative spatial errors at the stored snapshot closest to t_star.
ErrorNorms snapshot_error(const DensityField& reference, const DensityField& candidate,
                          double t_star);

// Smallest density value over all snapshots.
double min_density(const DensityField& f);

// ============================================================================
// CSV output
// ============================================================================

// Locale-independent full-precision formatting used in all CSV files.
std::string csv_number(double v);

// One `snap_<model>_<time>.csv` per snapshot with x,density rows; ':' in the
// model name is replaced by '-'. Returns the written paths.
std::vector<std::string> write_snapshot_csvs(const std::string& dir, const std::string& model,
                                             const DensityField& f);

// Long format: model,time,x,density for every stored sample.
void write_field_csv(const std::string& path, const std::string& model, const DensityField& f);
DensityField read_field_csv(const std::string& path);

struct TableRow {
    std::string model;
    ErrorNorms space_time;
    ErrorNorms at_char_time;
};

// Aligned console table of relative errors.
std::string format_error_table(const std::vector<TableRow>& rows);
// model,l1,l2,linf,char_l1,char_l2,char_linf rows.
void write_error_table_csv(const std::string& path, const std::vector<TableRow>& rows);

}  // namespace momentkit
