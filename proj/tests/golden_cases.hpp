#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace golden {

struct Case {
  std::string file;
  std::vector<std::string> args;  // "@name" expands to a path in the golden directory
};

inline void PrintTo(const Case& c, std::ostream* os) { *os << c.file; }

inline std::vector<Case> cases() {
  return {
      {"bounds.csv",
       {"bounds", "--methods", "stitched,beta_binomial,normal_mixture,lil_uniform,double_stitch,dkw_fixed,szorenyi",
        "--p", "0.05,0.5", "--t", "32,1000,100000"}},
      {"track.csv", {"track", "--input", "@stream.in", "--p", "0.5", "--method", "beta_binomial", "--intersect"}},
      {"band.csv", {"band", "--input", "@stream.in", "--checkpoints", "50,300"}},
      {"abtest.csv", {"abtest", "--input", "@ab.in", "--arms", "control,treatment", "--running-min"}},
      {"abtest_global.csv", {"abtest", "--input", "@ab.in", "--arms", "control,treatment", "--mode", "global"}},
      {"abtest_sim.csv", {"abtest", "--simulate", "--runs", "2", "--eps", "0.1", "--seed", "5"}},
      {"ks.csv", {"ks", "--input", "@ks.in", "--mode", "two_sample", "--arms", "x,y", "--latch"}},
      {"bai.csv", {"bai", "--runs", "2", "--pi", "0.3,0.7", "--K", "3", "--eps", "0.1", "--seed", "3"}},
  };
}

inline std::vector<std::string> resolve(const Case& c, const std::string& dir) {
  std::vector<std::string> out;
  for (const std::string& a : c.args) out.push_back(a.rfind('@', 0) == 0 ? dir + "/" + a.substr(1) : a);
  return out;
}

}  // namespace golden
