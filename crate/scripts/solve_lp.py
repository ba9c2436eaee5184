"""Solve exported LP files with HiGHS and print the optimal day count.

    pip install highspy
    python3 scripts/solve_lp.py model1.lp model2.lp
"""

import sys

import highspy


def main(paths):
    for path in paths:
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("time_limit", 600.0)
        h.readModel(path)
        h.run()
        status = h.modelStatusToString(h.getModelStatus())
        print(f"{path}\t{status}\t{h.getInfo().objective_function_value:g}")


if __name__ == "__main__":
    main(sys.argv[1:])
