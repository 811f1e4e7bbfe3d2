package com.jee;

import java.io.IOException;
import javax.servlet.RequestDispatcher;
import javax.servlet.ServletException;
import javax.servlet.annotation.WebServlet;
import javax.servlet.http.*;

@WebServlet("/ServletURL")
public class MyFirstServlet extends HttpServlet
{
	protected void doGet(HttpServletRequest request, HttpServletResponse response)
			throws ServletException, IOException {
		// 1)Using include
		RequestDispatcher dispatcher =
		getServletContext().getRequestDispatcher("/MySecondServlet");
		dispatcher.include(request, response);
		// ...
		// 2)Using forward
		RequestDispatcher dispatcher =
		getServletContext().getRequestDispatcher("/MySecondServlet");
		dispatcher.forward(request, response);
		// ...
		// 2)Using another scenario
		getServletContext().getRequestDispatcher("/MySecondServlet").forward(request, response);
	}
}
