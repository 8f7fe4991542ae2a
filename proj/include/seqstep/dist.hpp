#ifndef SEQSTEP_DIST_HPP
#define SEQSTEP_DIST_HPP

namespace seqstep {

// Standard normal CDF.
double normal_cdf(double z);

// Regularized incomplete beta function I_x(a,b), continued-fraction
// evaluation, absolute accuracy around 1e-14.
double inc_beta(double a, double b, double x);

// Student-t CDF with nu degrees of freedom.
double t_cdf(double nu, double t);

}  // namespace seqstep

#endif
