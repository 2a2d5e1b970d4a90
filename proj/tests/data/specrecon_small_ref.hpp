// Generated by tests/oracles/specrecon_small.py; do not edit.
#pragma once

namespace specrecon_small {

inline constexpr int kQ = 5;
inline constexpr int kH = 4;
inline constexpr int kW = 4;
inline constexpr int kAtoms = 10;
inline constexpr double kEta = 0.01;
inline constexpr double kEtaTv = 0.005;
inline constexpr double kObjective = 0.096237391335827607;
inline constexpr double kWavelengths[] = {400, 450, 500, 550, 600};
inline constexpr double kNotchCentres[] = {450, 500, 550};
inline constexpr double kNotchHalfWidths[] = {20, 20, 20};
// column-major Q x atoms
inline constexpr double kDict[] = {-0.17800393685238378, -0.61637448299791442, 0.029331075179406006, 0.63715971904526514, -0.42610359729657887, -0.44674448381448223, 0.35352000873208883, -0.74850716306693832, 0.19428782779044568, -0.27826648453838254, 0.057542160732562103, 0.17018557538958742, 0.075303172086014239, 0.65258158030728508, -0.73225165277039395, -0.58558134381616622, -0.30355888008698445, -0.26686039125365174, -0.6419041384995694, -0.28581655769367581, 0.21232771689247931, -0.69655774704940099, 0.17886957615420235, 0.65258497853670472, -0.10891632650505019, -0.17521773595191911, -0.80068418233863869, -0.1103463747322353, -0.55755165412636909, -0.071856911462933756, -0.41413810094673292, -0.44929688398197803, 0.48827154236501608, -0.49547489858301241, -0.37777965691519239, 0.25184690633524492, 0.81637660835527193, 0.51748469650070927, -0.046933444353685655, -0.010450348720380446, -0.65186206098480681, 0.28635896306763703, 0.45723660357617441, -0.50458085265903807, -0.17148541978684409, -0.090733639974557662, 0.13104888284450503, -0.23381167865646579, -0.68421633983186125, 0.67214112812199722};
// apertures x pixels, row-major
inline constexpr double kObs[] = {-0.094338218866044016, 0.011362234641593735, 0.11255886380781746, -0.16870856400158873, -0.088939974783825065, -0.29964938288251786, -0.033154645800527988, -0.22040770208045696, -0.13569131056024339, -0.21498647919336406, 0.093444020069922709, -0.06101712816621755, -0.071808280722759368, -0.29928194391825402, -0.1152212838012059, -0.22288450848273902, -0.091271803259002859, -0.031208229921771302, 0.010437978533802517, -0.26721714958372617, -0.24099451071858893, -0.37869570769330707, -0.077769967395092343, -0.2378993864788842, -0.10684448160930776, -0.19968950451148504, 0.06620323127150135, -0.066864115989326872, -0.16465221387076306, -0.34637025220530798, -0.14083169903731418, -0.12583287125439341, -0.10164344774061526, -0.14879592157886176, -0.028100117969280643, -0.15300546359791226, -0.2683190514647012, -0.25105931174757645, 0.013491028664156201, -0.1997690200876211, -0.045958843203308071, -0.19379487247636251, 0.076594091214694168, -0.037089136607106318, -0.14983254498769843, -0.26781259439660332, -0.05618713985577134, -0.18808020324344027, -0.081452917934719135, -0.016013380390489444, 0.016620688759378114, -0.20341731239906377, -0.19923729064564791, -0.30040848743426946, -0.037009419888231525, -0.19596946076698316, -0.11423254397020664, -0.18048036217281227, 0.086301692037960398, -0.021864532493098787, -0.09560869809999778, -0.31168072179664935, -0.13909909015388, -0.16751707232899185};
inline constexpr double kPan[] = {-0.081452917934719135, -0.016013380390489444, 0.016620688759378114, -0.20341731239906377, -0.19923729064564791, -0.30040848743426946, -0.037009419888231525, -0.19596946076698316, -0.11423254397020664, -0.18048036217281227, 0.086301692037960398, -0.021864532493098787, -0.09560869809999778, -0.31168072179664935, -0.13909909015388, -0.16751707232899185};
// bands x pixels, row-major
inline constexpr double kCubeRef[] = {-0.10371754763875712, -0.047205913546792641, 0.058319776202425899, -0.24254853049891562, -0.22187969417557885, -0.38743886581375431, -0.05266325294227911, -0.27884035290253506, -0.13831555776679505, -0.2581901539971449, 0.1020766704828068, -0.065246905558250731, -0.14749358999959905, -0.40032390157469788, -0.15682833968315971, -0.25182514566122388, -0.13010959183171161, -0.15959614152114562, -0.11694973337702969, -0.2296301339948098, -0.44131312538572592, -0.3177002787947496, -0.043008862697155252, -0.18405720874856007, -0.071701252412114475, -0.15672122887155901, 0.070375296849298857, -0.021249174717330697, -0.16442245668910901, -0.28528872683604845, -0.081298073674366908, -0.071985558042485354, -0.092094824297862185, -0.031001686736088496, 0.052920591124033793, -0.051914516877430657, -0.12420175237285647, -0.16515146161438143, 0.047137639376918436, -0.12398886736400477, -0.063032991281200004, -0.13109619335154821, 0.093967456271956323, -0.014541187859498227, -0.032049599815128456, -0.20550749581657859, -0.071469612436415877, -0.18888506337065911, -0.077737619389589702, 0.10968703036692794, 0.11739513190491903, -0.31209020122158015, -0.095148173653805887, -0.42832529747633835, -0.059502335163406868, -0.28281514793188967, -0.15161912190068536, -0.27224851015093604, 0.063498979802694713, -0.067293161148088074, -0.13644798146918322, -0.41458773030148577, -0.17191251316040401, -0.18643608802373512, -0.035776706591709347, -0.070451208721911504, -0.005299604242899286, -0.13292646025409843, -0.10336028107387528, -0.20697580971587606, -0.04070309664059777, -0.14871097826221835, -0.067510478003029867, -0.1215708712594907, 0.044184293324337327, -0.028891929919827943, -0.078461061147398301, -0.19405726626927469, -0.076546386903212027, -0.12775863527318959};

}  // namespace specrecon_small
