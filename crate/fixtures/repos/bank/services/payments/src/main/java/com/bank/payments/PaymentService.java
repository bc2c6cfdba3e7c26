package com.bank.payments;

public class PaymentService {
    private final PaymentGateway gateway = new PaymentGateway();

    public boolean pay(String payee, long cents) {
        return gateway.transfer(new Payment(payee, cents));
    }
}
