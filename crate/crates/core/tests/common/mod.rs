#![allow(dead_code)]

use std::path::PathBuf;

use grps::cli::{Problem, ProblemFile};
use grps::expr::{parse_with, Constants, Expr};
use grps::grps::ProblemSpec;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn problem_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
}

pub fn bundled() -> Vec<&'static str> {
    vec![
        "blackscholes.json",
        "wave3d.json",
        "biological.json",
        "gasdynamics-exp.json",
        "gasdynamics-power.json",
        "gasdynamics-shifted.json",
    ]
}

pub fn load(name: &str, alpha: Option<f64>) -> Problem {
    ProblemFile::load(&problem_path(name))
        .unwrap()
        .compile(alpha)
        .unwrap()
}

/// Parses `src` with the given name/expression pairs substituted.
pub fn expr(src: &str, subs: &[(&str, &Expr)]) -> Expr {
    let consts: Constants = subs
        .iter()
        .map(|(k, v)| (k.to_string(), (*v).clone()))
        .collect();
    parse_with(src, &consts).unwrap_or_else(|e| panic!("{src}: {e}"))
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// lnΓ(x) for x = 0.5, 1.0, ..., 50.0 to 40 significant digits (mpmath, 50-digit working precision).
#[allow(clippy::approx_constant, clippy::excessive_precision)]
pub const LOG_GAMMA_TABLE: [(f64, f64); 100] = [
    (0.5, 0.5723649429247000870717136756765293558236),
    (1.0, 0.0),
    (1.5, -0.1207822376352452223455184457816472122519),
    (2.0, 0.0),
    (2.5, 0.2846828704729191596324946696827019243201),
    (3.0, 0.6931471805599453094172321214581765680755),
    (3.5, 1.200973602347074224816021881450712995770),
    (4.0, 1.791759469228055000812477358380702272723),
    (4.5, 2.453736570842442220504142503435716157332),
    (5.0, 3.178053830347945619646941601297055408874),
    (5.5, 3.957813967618716293877400855822590998551),
    (6.0, 4.787491742782045994247700934523243048400),
    (6.5, 5.662562059857141528522112312329543730298),
    (7.0, 6.579251212010100995060178292903945321123),
    (7.5, 7.534364236758732955158367632436685767027),
    (8.0, 8.525161361065414300165531036347125050760),
    (8.5, 9.549267257300997711737140081127222543125),
    (9.0, 10.60460290274525022841722740072165475499),
    (9.5, 11.68933342079726848256944257754217251064),
    (10.0, 12.80182748008146961120771787456670616428),
    (10.5, 13.94062521940376363316123788797184947980),
    (11.0, 15.10441257307551529522570932925107037188),
    (11.5, 16.29200047656724132024460374687937834601),
    (12.0, 17.50230784587388583928765290721619967170),
    (12.5, 18.73434751193644570163412445723139789638),
    (13.0, 19.98721449566188614951736238705507851250),
    (13.5, 21.26007615624470114141841100222559660735),
    (14.0, 22.55216385312342288557084982862039711731),
    (14.5, 23.86276584168908490618691459153499715322),
    (15.0, 25.19122118273868150009343469352175341502),
    (15.5, 26.53691449111561362395295450243873219064),
    (16.0, 27.89927138384089156608943926367046675919),
    (16.5, 29.27775451504081456046488670552291283301),
    (17.0, 30.67186010608067280375836774950317303150),
    (17.5, 32.08111489594734948650484339895239126941),
    (18.0, 33.50507345013688888400790236737629956708),
    (18.5, 34.94331577687681785679372335416358207049),
    (19.0, 36.39544520803305357621562496267952754445),
    (19.5, 37.86108650896109699174458690373685266632),
    (20.0, 39.33988418719949403622465239456738108169),
    (20.5, 40.83150097453079810977608746076652040769),
    (21.0, 42.33561646075348502965987597070992185737),
    (21.5, 43.85192586067516060422561871234575142800),
    (22.0, 45.38013889847690802616047395107562729165),
    (22.5, 46.91997879580877771828122910423342189548),
    (23.0, 48.47118135183522387963964965049893315955),
    (23.5, 50.03349410501915216625524678984648437622),
    (24.0, 51.60667556776437357044640248230912927799),
    (24.5, 53.19049452616926544365896533816048151704),
    (25.0, 54.78472939811231919009334408360618468687),
    (25.5, 56.38916764371994674445243870358866440824),
    (26.0, 58.00360522298051993929486275005855996592),
    (26.5, 59.62784609588432720667998643692614008040),
    (27.0, 61.26170176100200198476558231308205513880),
    (27.5, 62.90499082887650373140722345449702128269),
    (28.0, 64.55753862700633105895131802384963225274),
    (28.5, 66.21917683354902934065269424423016165396),
    (29.0, 67.88974313718153498289113501020916511853),
    (29.5, 69.56908092082363418263973479158236432777),
    (30.0, 71.25703896716800901007440704257107672402),
    (30.5, 72.95347118416940832383855304384388538376),
    (31.0, 74.65823634883016438548764373417796663627),
    (31.5, 76.37119786778277426317271002581132356200),
    (32.0, 78.09222355331531063141680805872032384672),
    (32.5, 79.82118541361436164165132112164137813285),
    (33.0, 81.55795945611503717850296866601120668710),
    (33.5, 83.30242550295005344288833577497470780911),
    (34.0, 85.05446701758151741396015748089886169157),
    (34.5, 86.81397094178107419314117564988025399160),
    (35.0, 88.58082754219767880362692422023016479523),
    (35.5, 90.35493026581838826592594159715479924661),
    (36.0, 92.13617560368709248333303629689953216439),
    (36.5, 93.92446296229975837783816400820965677530),
    (37.0, 95.71969454214320248495799101366093670984),
    (37.5, 97.52177522288820419751304074419002277813),
    (38.0, 99.33061245478742692932608668469238387374),
    (38.5, 101.1461161558645693286925725261067471938),
    (39.0, 102.9681986145138126987523462380384139791),
    (39.5, 104.7967743971583078684426367260568796551),
    (40.0, 106.6317602606434591262010789165262582885),
    (40.5, 108.4730750690653840531983501460801140092),
    (41.0, 110.3206397147573954290535346141269756323),
    (41.5, 112.1743770431778775093620989723120402597),
    (42.0, 114.0342117814617032329202979871643832206),
    (42.5, 115.9000704704145301234203390741452341447),
    (43.0, 117.7718813997450715388381280889882652230),
    (43.5, 119.6495745463449012688534009037863717517),
    (44.0, 121.5330815154386339623109706023341122586),
    (44.5, 123.4223354844395396780146860516126324938),
    (45.0, 125.3172711493568951252073784232155946945),
    (45.5, 127.2178246736117342069152694708243051451),
    (46.0, 129.1239336391272148825986282302868337433),
    (46.5, 131.0355369995686389386568775343746269115),
    (47.0, 132.9525750356163098828226131835552064299),
    (47.5, 134.8749893121619495665640549743813332585),
    (48.0, 136.8027226373263684696435638533273801388),
    (48.5, 138.7357190232025450917566096180371978672),
    (49.0, 140.6739236482342593987077375760826121157),
    (49.5, 142.6172828211459826044560991182829830129),
    (50.0, 144.5657439463448860089184430629689715750),
];

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// erfc(-z) = 1 + erf(z) for z >= 0, erf by composite Gauss-Legendre quadrature.
pub fn erfc_neg(z: f64) -> f64 {
    let rule = gauss_legendre(20);
    let panels = 64;
    let h = z / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in &rule {
            let u = mid + 0.5 * h * x;
            acc += 0.5 * h * w * (-u * u).exp();
        }
    }
    1.0 + 2.0 / std::f64::consts::PI.sqrt() * acc
}

/// Σ_{m≥0} z^m / Γ(1 + mα) summed with an independent Γ.
pub fn ml_reference(alpha: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    for m in 0..400 {
        let term = z.powi(m) / gamma(1.0 + m as f64 * alpha);
        sum += term;
        if m > 10 && term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

const COEFFS: [&str; 7] = ["1", "-1", "1/2", "-2/3", "x", "(1 + x^2)/4", "3/2"];
const FACTORS: [&str; 3] = ["psi", "Dx(psi)", "Dx(psi, 2)"];
const INITIALS: [&str; 6] = [
    "exp(x/2)",
    "1 + x^2",
    "sin(x)",
    "cos(x) + x/3",
    "x^3 - x",
    "x*exp(-x)",
];
const SOURCES: [&str; 3] = ["x", "1", "sin(x)/2"];

/// Random problem with a polynomial nonlinearity of psi-degree at most 3.
pub fn random_problem(rng: &mut ChaCha8Rng) -> (ProblemSpec, String) {
    let n = rng.gen_range(1..=2);
    let alpha = *[0.4, 0.7, 1.0].choose(rng).unwrap();
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let degree = rng.gen_range(1..=3);
        let mut t = vec![COEFFS.choose(rng).unwrap().to_string()];
        for _ in 0..degree {
            t.push(FACTORS.choose(rng).unwrap().to_string());
        }
        terms.push(t.join("*"));
    }
    let template = terms.join(" + ");
    let initials: Vec<Expr> = (0..n)
        .map(|_| grps::parse(INITIALS.choose(rng).unwrap()).unwrap())
        .collect();
    let source: Vec<Expr> = (0..rng.gen_range(0..=2))
        .map(|_| grps::parse(SOURCES.choose(rng).unwrap()).unwrap())
        .collect();
    let label = format!("n={n} alpha={alpha} N={template}");
    let spec = ProblemSpec::new(
        n,
        alpha,
        &["x"],
        grps::parse(&template).unwrap(),
        initials,
        source,
    )
    .unwrap();
    (spec, label)
}
