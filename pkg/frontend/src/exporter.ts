/** Download the rendered cloud in the text cloud format: one `x y z` line
 * per point, full-precision decimals the backend parses losslessly.
 */

export function cloudToText(points: number[][]): string {
    return points.map((p) => `${p[0]} ${p[1]} ${p[2]}`).join("\n") + "\n";
}

export function downloadCloud(points: number[][], filename = "cloud.xyz"): void {
    const blob = new Blob([cloudToText(points)], { type: "text/plain" });
    const url = URL.createObjectURL(blob);
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = filename;
    anchor.click();
    URL.revokeObjectURL(url);
}
