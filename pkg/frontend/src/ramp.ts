// Sequential color ramp (viridis stops, linear interpolation). Cells with a
// count of zero never touch the ramp: they render as a light-gray dash, so
// the discontinuity at zero stays visible regardless of the scale.

const STOPS: [number, number, number][] = [
  [253, 231, 37],
  [181, 222, 43],
  [110, 206, 88],
  [53, 183, 121],
  [31, 158, 137],
  [38, 130, 142],
  [49, 104, 142],
  [62, 74, 137],
  [72, 40, 120],
  [68, 1, 84],
];

export function rampColor(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const scaled = clamped * (STOPS.length - 1);
  const i = Math.min(STOPS.length - 2, Math.floor(scaled));
  const frac = scaled - i;
  const [r0, g0, b0] = STOPS[i];
  const [r1, g1, b1] = STOPS[i + 1];
  const mix = (a: number, b: number) => Math.round(a + (b - a) * frac);
  return `rgb(${mix(r0, r1)}, ${mix(g0, g1)}, ${mix(b0, b1)})`;
}

/** Color for a normalized cell value against the visible maximum. */
export function colorFor(value: number, max: number): string {
  if (max <= 0) return rampColor(0);
  return rampColor(value / max);
}
