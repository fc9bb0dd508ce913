from errors import CutoffLabError
from experiments import (
    analysis_options,
    ensure_passed,
    json_rows,
    run_command,
    validate_config,
)
from flask import Blueprint, current_app, jsonify, request


api_bp = Blueprint("api", __name__)


def _run(command: str):
    """
    Runs one command on the JSON config in the request body

    The body is the same document the command line reads from --config.
    Query parameters epsilon and radius override the analysis block the
    way the command line flags do

    Returns:
        Response: A JSON response with the rows, the comment lines and
                  the summary of a scan. A config or domain error gives
                  a 400, an enumeration past the cap a 413 and a failed
                  check a 500, each with an error message.
    """
    try:
        config = validate_config(request.get_json(silent=True))
        options = analysis_options(
            config,
            current_app.config["CUTOFFLAB"],
            command,
            request.args.get("epsilon", type=float),
            request.args.get("radius", type=int),
        )
        report = run_command(command, config, options)
        body = {
            "command": command,
            "comments": report.comments,
            "rows": json_rows(report.rows),
        }
        if report.summary:
            body["summary"] = report.summary
        try:
            ensure_passed(report)
        except CutoffLabError as e:
            body["error"] = str(e)
            current_app.logger.warning("%s failed its checks: %s", command, e)
            return jsonify(body), e.http_status
        return jsonify(body)
    except CutoffLabError as e:
        error_message = f"Error when running {command}: {str(e)}"
        current_app.logger.info(error_message)
        return jsonify({"error": error_message}), e.http_status
    except Exception as e:
        error_message = f"Error when running {command}: {str(e)}"
        current_app.logger.exception(error_message)
        # Return a 500 error status
        return jsonify({"error": error_message}), 500


@api_bp.route("/api/analyze", methods=["POST"])
def analyze():
    """Returns the bound rows for every k of the configured state"""
    return _run("analyze")


@api_bp.route("/api/scan", methods=["POST"])
def scan():
    """
    Returns the cut-off windows of a family together with the summary
    line
    """
    return _run("scan")


@api_bp.route("/api/cogrowth", methods=["POST"])
def cogrowth():
    return _run("cogrowth")


@api_bp.route("/api/psd-check", methods=["POST"])
def psd_check():
    """Returns the smallest Gram matrix eigenvalue on the configured ball"""
    return _run("psd-check")


@api_bp.route("/api/verify", methods=["POST"])
def verify():
    """
    Returns every oracle comparison with its largest deviation

    Responds with a 500 and the full report when a check fails
    """
    return _run("verify")
