/**
 * Least-squares refit of the swirl-scaling law, mirroring the producer:
 * slope/intercept of log(value) on log(nu) with the mean-centered formula.
 */

export interface FitResult {
  slope: number;
  intercept: number;
  n: number;
}

export function fitLogLog(points: Array<[number, number]>): FitResult {
  if (points.length < 3) {
    throw new Error(`fitLogLog needs at least 3 points, got ${points.length}`);
  }
  for (const [nu, v] of points) {
    if (!(nu > 0) || !(v > 0)) {
      throw new Error("fitLogLog needs positive nu and values");
    }
  }
  const x = points.map(([nu]) => Math.log(nu));
  const y = points.map(([, v]) => Math.log(v));
  const n = x.length;
  const xbar = x.reduce((a, b) => a + b, 0) / n;
  const ybar = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  const slope = sxy / sxx;
  return { slope, intercept: ybar - slope * xbar, n };
}
