/** The bundled demo dataset: five items scored on two attributes, values already in [0, 1]. */

export const DEMO_CSV = `id,price_score,review_score
t1,0.63,0.71
t2,0.83,0.65
t3,0.58,0.78
t4,0.7,0.68
t5,0.53,0.82
`;

export const DEMO_ID_COL = "id";
export const DEMO_ATTRS = ["price_score:higher", "review_score:higher"];
/** The demo values are already scaled, so they are uploaded as-is. */
export const DEMO_NORMALIZE = false;
export const DEMO_REFERENCE_WEIGHTS = "1, 1";
