#include "modsafe/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace modsafe {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

void put_row(std::string& out, std::initializer_list<double> vals) {
  bool first = true;
  for (const double v : vals) {
    if (!first) out += ',';
    out += format_double(v);
    first = false;
  }
  out += '\n';
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::string out =
      "t,q1,q2,qd1,qd2,u1,u2,uref1,uref2,that1,that2,ttil_norm,V,psi0,psi1,"
      "stack_size,sigma_min\n";
  out.reserve(out.size() + traj.records.size() * 220);
  for (const TrajectoryRecord& r : traj.records) {
    out += format_double(r.t);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
      out += ',';
      out += format_double(r.x(i));
    }
    for (Eigen::Index i = 0; i < r.u.size(); ++i) {
      out += ',';
      out += format_double(r.u(i));
    }
    for (Eigen::Index i = 0; i < r.u_ref.size(); ++i) {
      out += ',';
      out += format_double(r.u_ref(i));
    }
    for (Eigen::Index i = 0; i < r.theta_hat.size(); ++i) {
      out += ',';
      out += format_double(r.theta_hat(i));
    }
    out += ',';
    out += format_double(r.ttil_norm);
    out += ',';
    out += format_double(r.V);
    out += ',';
    out += format_double(r.psi0);
    out += ',';
    out += format_double(r.psi1);
    out += ',';
    out += std::to_string(r.stack_size);
    out += ',';
    out += format_double(r.sigma_min);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const MonteCarloSummary& summary) {
  std::string out = "t,ttil_mean,ttil_std,ttil_min,ttil_max\n";
  out.reserve(out.size() + summary.times.size() * 90);
  for (std::size_t k = 0; k < summary.times.size(); ++k)
    put_row(out, {summary.times[k], summary.ttil_mean[k], summary.ttil_std[k],
                  summary.ttil_min[k], summary.ttil_max[k]});
  return out;
}

std::string runs_csv(const std::vector<RunStats>& runs) {
  std::string out = "run,seed,final_x_norm,min_psi0,violations\n";
  for (const RunStats& r : runs) {
    out += std::to_string(r.run);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += format_double(r.final_x_norm);
    out += ',';
    out += format_double(r.min_psi0);
    out += ',';
    out += std::to_string(r.issf_violations);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = "law,that0_1,that0_2,min_psi0,max_ttil,final_x_norm\n";
  for (const SweepRecord& r : records) {
    out += estimator_law_name(r.law);
    for (Eigen::Index i = 0; i < r.that0.size(); ++i) {
      out += ',';
      out += format_double(r.that0(i));
    }
    out += ',';
    out += format_double(r.min_psi0);
    out += ',';
    out += format_double(r.max_ttil);
    out += ',';
    out += format_double(r.final_x_norm);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace modsafe
