/*
 *   Copyright 2026 The aap-solver Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


/* The public header must compile as C; exercises a solve end to end. */
#include <stdio.h>

#include "aap/aap.h"

int main(void) {
  aap_problem* p = NULL;
  aap_report* r = NULL;
  aap_solver_options opts;
  aap_solve_status st;
  double x0[6] = {0, 0, 0, 0, 0, 0};
  if (aap_problem_affine_random(6, 0.8, 3, &p) != AAP_OK) return 1;
  aap_solver_options_default(&opts);
  opts.m = 2;
  if (aap_solve(p, AAP_SOLVER_AAP, &opts, x0, &r) != AAP_OK) return 2;
  if (aap_report_status(r, &st) != AAP_OK || st != AAP_SOLVE_CONVERGED) return 3;
  printf("%s %zu\n", aap_version(), aap_report_g_evals(r));
  aap_report_free(r);
  aap_problem_free(p);
  return 0;
}
