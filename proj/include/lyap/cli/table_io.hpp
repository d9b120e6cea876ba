#pragma once

#include <string>

#include "lyap/domain.hpp"
#include "lyap/dual.hpp"
#include "lyap/family.hpp"
#include "lyap/field.hpp"

namespace lyap::cli {

// CSV table formats (0-based cell_index, 1-based member index i):
//   family:    cell_index,i,f_1..f_n            one row per (cell, member)
//   density:   cell_index,theta_1..theta_m
//   field:     cell_index,v_1..v_m
//   partition: cell_index,assigned_i,frac_theta_1..frac_theta_m
// Doubles are written with 17 significant digits so re-ingestion is exact.

FunctionFamily read_family_csv(const std::string& path, const SampledDomain& dom);
void write_family_csv(const std::string& path, const FunctionFamily& family,
                      const SampledDomain& dom);

RelaxedDensity read_density_csv(const std::string& path, const SampledDomain& dom);
void write_density_csv(const std::string& path, const RelaxedDensity& density);

AuxiliaryField read_field_csv(const std::string& path, const SampledDomain& dom);
void write_field_csv(const std::string& path, const AuxiliaryField& field);

void write_partition_csv(const std::string& path, const Partition& partition);
Partition read_partition_csv(const std::string& path, const SampledDomain& dom);

// Plot-ready cell table: positions, assignment and tie margins.
void write_plot_csv(const std::string& path, const SampledDomain& dom,
                    const Partition& partition, const FunctionFamily& family,
                    const AuxiliaryField& field,
                    const std::vector<double>& lambda_star, double tie_tol);

}  // namespace lyap::cli
