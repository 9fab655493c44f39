// Generated by generate.py; do not edit.

#![allow(clippy::excessive_precision)]

/// (S, N, tau, ln P) for the martingale bound.
pub const MARTINGALE: [(f64, u64, f64, f64); 50] = [
    (2.02, 100, 0.0, -0.001670392099608186987),
    (2.02, 1000, 0.00063, -0.0093604046726477399912),
    (2.02, 10000, 1e-05, -0.16570853884358463222),
    (2.02, 55568, 0.01, 0.0),
    (2.02, 1000000, 0.05, 0.0),
    (2.05, 100, 0.0, -0.010475393244250686777),
    (2.05, 1000, 0.00063, -0.084807762707931909206),
    (2.05, 10000, 1e-05, -1.0442086466408716596),
    (2.05, 55568, 0.01, 0.0),
    (2.05, 1000000, 0.05, 0.0),
    (2.1, 100, 0.0, -0.042143532075480405396),
    (2.1, 1000, 0.00063, -0.38048472866832746552),
    (2.1, 10000, 1e-05, -4.2076891853189052295),
    (2.1, 55568, 0.01, -1.0319782347959088008),
    (2.1, 1000000, 0.05, 0.0),
    (2.2, 100, 0.0, -0.17059966648070099412),
    (2.2, 1000, 0.00063, -1.6230372280167302796),
    (2.2, 10000, 1e-05, -17.046635936951087547),
    (2.2, 55568, 0.01, -35.238148245207729979),
    (2.2, 1000000, 0.05, 0.0),
    (2.3, 100, 0.0, -0.388698176515052867),
    (2.3, 1000, 0.00063, -3.7620134836564461217),
    (2.3, 10000, 1e-05, -38.84982025149639831),
    (2.3, 55568, 0.01, -119.25679354521538822),
    (2.3, 1000000, 0.05, 0.0),
    (2.5, 100, 0.0, -1.1094311400039422087),
    (2.5, 1000, 0.00063, -10.885325429137733392),
    (2.5, 10000, 1e-05, -110.90978322260557937),
    (2.5, 55568, 0.01, -445.40501718495910649),
    (2.5, 1000000, 0.05, -709.99441720143146639),
    (2.8, 100, 0.0, -2.9764827946006495513),
    (2.8, 1000, 0.00063, -29.429815440993397785),
    (2.8, 10000, 1e-05, -297.594948615606684),
    (2.8, 55568, 0.01, -1371.365276343614141),
    (2.8, 1000000, 0.05, -9175.6487340074060697),
    (3.2, 100, 0.0, -7.2460327927143681466),
    (3.2, 1000, 0.00063, -71.957280043315371446),
    (3.2, 10000, 1e-05, -724.52328167141903731),
    (3.2, 55568, 0.01, -3595.1714802719206678),
    (3.2, 1000000, 0.05, -38264.665742929773451),
    (3.6, 100, 0.0, -14.409744353931387608),
    (3.6, 1000, 0.00063, -143.42636027667035395),
    (3.6, 10000, 1e-05, -1440.8677710375614772),
    (3.6, 55568, 0.01, -7427.2053815854695847),
    (3.6, 1000000, 0.05, -96295.298382885164594),
    (3.95, 100, 0.0, -25.659813497848485799),
    (3.95, 1000, 0.00063, -255.7800207593780252),
    (3.95, 10000, 1e-05, -2565.8513520181567284),
    (3.95, 55568, 0.01, -13548.533631831738746),
    (3.95, 1000000, 0.05, -196890.31722136818781),
];

/// (z, two-sided normal p-value).
pub const NORMAL: [(f64, f64); 10] = [
    (0.0, 1.0),
    (0.1, 0.92034432544594203266),
    (0.359, 0.71959508927406560252),
    (0.5, 0.61707507745197379272),
    (1.0, 0.31731050786291410283),
    (1.959963984540054, 0.050000000000000021752),
    (2.5, 0.012419330651552270334),
    (3.0, 0.0026997960632601890533),
    (5.0, 5.7330314375838782335e-7),
    (8.0, 1.2441921148543568247e-15),
];

/// (t, dof, two-sided Student-t p-value).
pub const STUDENT_T: [(f64, f64, f64); 8] = [
    (0.5, 5.0, 0.63829887164092900671),
    (2.0, 10.0, 0.073388034770740365618),
    (0.661, 9998.0, 0.50862754417215402238),
    (2.46, 3709.0, 0.013938993125183944077),
    (1.0, 298.0, 0.31812180858607829581),
    (3.5, 30.0, 0.0014768074376442530632),
    (0.1, 2.0, 0.92946543841414016922),
    (4.0, 100.0, 0.0001215236443007616772),
];
